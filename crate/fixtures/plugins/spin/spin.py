"""Busy-loops forever."""
x = 0
while True:
    x += 1
