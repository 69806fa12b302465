"""HTTP service wrapping the engine: submit runs, poll progress, fetch results."""
