# Starting layout: four corner circles plus a small center circle.
circles = [
    (0.2, 0.2, 0.2),
    (0.8, 0.2, 0.2),
    (0.2, 0.8, 0.2),
    (0.8, 0.8, 0.2),
    (0.5, 0.5, 0.1),
]
for x, y, r in circles:
    print(x, y, r)
