import time
from contextlib import ContextDecorator


class Timer(ContextDecorator):
    """ wall time of the block in milliseconds, kept on .elapsed """

    def __init__(self, name, enabled=True):
        self.name = name
        self.enabled = enabled
        self.elapsed = 0.0

    def __enter__(self):
        if self.enabled:
            self.start = time.perf_counter()
        return self

    def __exit__(self, type, value, traceback):
        if self.enabled:
            self.elapsed = 1000.0 * (time.perf_counter() - self.start)
