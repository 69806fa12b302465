"""Prompt assembly for the mutation operator and the child-program extraction.

The mode-context, tactic-injection, and tactic-generator blocks below are
stable template constants; golden tests pin them byte-for-byte. Edit them
only with the goldens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .adaptation import SearchMode
from .state import MODE_EXPLORATION, ProgramRecord, TacticRecord

EXPLOITATION_CONTEXT = """--PARENT SELECTION CONTEXT
This parent was selected from the archive of top-performing programs. It has demonstrated strong performance, but there is likely still room for significant improvement.

--OPTIMIZATION GUIDANCE
- This solution works well, but don't assume it's optimal - meaningful improvements are still possible
- You may refine the existing approach OR introduce better algorithms if you identify a clear opportunity
- Consider: algorithmic improvements, better data structures, more efficient libraries, parallelization
- Optimizations like vectorization, caching, and numerical stability improvements are valuable
- If you see a fundamentally better approach, pursue it - but ensure correctness is maintained
- Think critically: what assumptions does this solution make? Can they be relaxed or improved?

--PARENT METRICS
{metrics_str}

Your goal: Improve upon this solution - whether through refinement or strategic redesign."""

EXPLORATION_CONTEXT = """--PARENT SELECTION CONTEXT
This parent was selected through diversity-driven sampling to explore different regions of the solution space. It may or may not represent optimal performance.

--EXPLORATION GUIDANCE
- Consider alternative algorithmic approaches or techniques
- Experiment with different methods or approaches
- Don't be constrained by the parent's approach - it's a starting point, not a template
- Look for opportunities to try fundamentally different algorithms or novel techniques
- Balance creativity with correctness - new ideas should still produce valid solutions

--PARENT METRICS
{metrics_str}

Your goal: Discover new approaches that might outperform current solutions."""

TACTIC_BLOCK = """--BREAKTHROUGH IDEA - IMPLEMENT THIS

The search has stagnated globally. You MUST implement this breakthrough idea:

**IDEA:** {idea}

**HOW TO IMPLEMENT:**
{description}

**TARGET METRIC:** {what_to_optimize}

**CAUTIONS:** {cautions}

**APPROACH TYPE:** {approach_type}

**CRITICAL:**
- You MUST implement the breakthrough idea
- Ensure the tactics are actually used in your implementation (not just mentioned in comments)
- Correctness is essential - your implementation must be correct and functional
- Verify output format matches evaluator requirements
- Make purposeful changes that implement the idea
- Test your implementation logic carefully"""

TACTIC_SYSTEM_MESSAGE = """You are an expert algorithm researcher proposing breakthrough (high-leverage) ideas.
First, deeply analyze the evaluator code to infer: the true objective, constraints/validations,
failure modes, and what is actually rewarded or penalized.
Then analyze the current best program to identify the algorithmic approach, why it works,
and the specific bottlenecks preventing further improvement.

Propose only ideas that are correct, implementable under the available libraries, and likely to improve the score.
Each idea must be fundamentally different from previously tried failures, and must explicitly target a
distinct weakness or metric revealed by the evaluator. Prefer simple, robust mechanisms over complex pipelines.
Avoid suggesting vague directions: name concrete techniques, functions, and key parameters.

Stage 1 — Understand the evaluation signal.
Carefully read the evaluator code to determine what is actually being optimized:
the primary objective, any secondary metrics, constraints, validation rules,
and sources of penalties or failure. Identify which quantities the program can influence
and which are fixed by the evaluator.

Stage 2 — Analyze the current best program.
Study the current best program before proposing new ideas.
Identify the algorithmic approach it uses, why it achieves the current best score,
and what structural or algorithmic limitations are preventing further improvement.
Focus on concrete bottlenecks rather than superficial weaknesses.

Stage 3 — Account for past attempts.
Review previously tried tactics and their outcomes.
Do not repeat failed approaches or close variants.
If an approach failed, reason about the underlying cause
(e.g., mismatch to problem structure, constraint violations, instability)
and avoid that class of ideas unless the root cause is explicitly addressed.

Stage 4 — Propose diverse tactics.
Generate multiple ideas that are fundamentally different from one another.
Each idea must be correct with respect to the evaluator, implementable with available libraries,
and explicitly target a distinct weakness or metric identified in earlier stages.
Each proposal should include a clear explanation of why it is likely to improve the score.

Stage 5 — Make ideas concrete and robust.
Be specific and actionable: name exact libraries, functions, methods, and key parameters.
Prefer simple, robust mechanisms over complex multi-stage pipelines.
Anticipate edge cases, numerical issues, and constraint handling.

Stage 6 — Sanity-check before answering.
Before finalizing, verify that each idea is feasible, non-redundant with past failures,
sufficiently diverse, and aligned with what the evaluator truly rewards."""

EVOLUTION_SYSTEM_TEMPLATE = """You are an expert programmer evolving candidate programs for the problem below. \
Rewrite the parent program into a complete, improved program. Respond with the full \
program in a single fenced code block; text outside the block is ignored.

Problem specification:
{problem_spec}"""

_FENCED_BLOCK_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


class ExtractionError(ValueError):
    """The operator response contained no fenced code block."""


@dataclass
class MutationRequest:
    """Everything the context builder needs for one mutation call."""

    parent: ProgramRecord
    inspirations: list[ProgramRecord]
    mode: SearchMode
    tactic: TacticRecord | None = None
    problem_spec: str = ""
    metrics_of_parent: dict[str, float] = field(default_factory=dict)


def format_metrics(metrics: dict[str, float]) -> str:
    if not metrics:
        return "(none)"
    return "\n".join(f"{name}: {metrics[name]:g}" for name in sorted(metrics))


def render_tactic_block(tactic: TacticRecord) -> str:
    return TACTIC_BLOCK.format(
        idea=tactic.idea,
        description=tactic.description,
        what_to_optimize=tactic.what_to_optimize,
        cautions=tactic.cautions,
        approach_type=tactic.approach_type,
    )


def build_context(request: MutationRequest) -> tuple[str, str]:
    """Assemble the (system, user) prompt pair for one mutation.

    User-message order: mode context, parent program, inspiration programs,
    then the tactic injection when a tactic is active.
    """
    template = (
        EXPLORATION_CONTEXT if request.mode.mode == MODE_EXPLORATION else EXPLOITATION_CONTEXT
    )
    parts = [template.format(metrics_str=format_metrics(request.metrics_of_parent))]

    parts.append(f"Improve the following program:\n```\n{request.parent.source}\n```")

    if request.inspirations:
        blocks = "\n".join(f"```\n{insp.source}\n```" for insp in request.inspirations)
        parts.append(f"Consider these alternative approaches:\n{blocks}")

    if request.tactic is not None:
        parts.append(render_tactic_block(request.tactic))

    system_text = EVOLUTION_SYSTEM_TEMPLATE.format(problem_spec=request.problem_spec)
    return system_text, "\n\n".join(parts)


def extract_program(response_text: str) -> str:
    """Return the contents of the last fenced code block in a response."""
    matches = _FENCED_BLOCK_RE.findall(response_text)
    if not matches:
        raise ExtractionError("response contains no fenced code block")
    block = matches[-1]
    return block[:-1] if block.endswith("\n") else block
