"""Allocates 64 MiB, touches every page, and holds it briefly."""
import time

SIZE = 64 * 1024 * 1024
buf = bytearray(SIZE)
for i in range(0, SIZE, 4096):
    buf[i] = 1
time.sleep(0.1)
print(sum(buf[::4096]))
