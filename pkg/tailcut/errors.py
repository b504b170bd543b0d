from typing import Iterable, Optional


class TailcutError(Exception):
    pass


class InvalidSample(TailcutError):
    pass


class NonPositiveThreshold(TailcutError):
    def __init__(self, k: int, threshold: float):
        self.k = k
        self.threshold = threshold
        super().__init__(f"threshold X_(n-k,n) = {threshold!r} at k={k} is not positive")


class DegenerateHill(TailcutError):
    def __init__(self, k: Optional[int] = None, hill: float = 0.0):
        self.k = k
        self.hill = hill
        super().__init__(f"Hill estimate {hill!r} at k={k} is not positive")


class DegenerateJackknife(TailcutError):
    def __init__(self, k: int):
        self.k = k
        super().__init__(f"generalized Jackknife estimate undefined at k={k}")


class InvalidTailProbability(TailcutError):
    def __init__(self, p: float, k: int, n: int):
        self.p = p
        self.k = k
        self.n = n
        super().__init__(f"tail probability p={p!r} must satisfy 0 < p < k/n = {k}/{n}")


class InsufficientData(TailcutError):
    def __init__(self, required: int, available: int, what: str = "entries"):
        self.required = required
        self.available = available
        super().__init__(f"need at least {required} {what}, got {available}")


class NoAdmissibleK(TailcutError):
    pass


class NoSearchRange(TailcutError):
    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi
        super().__init__(f"empty K search range [{lo}, {hi}]")


class UndefinedEntries(TailcutError):
    def __init__(self, indices: Iterable[int]):
        self.indices = list(indices)
        preview = ", ".join(str(i) for i in self.indices[:10])
        more = "" if len(self.indices) <= 10 else f", ... ({len(self.indices)} total)"
        super().__init__(f"undefined Hill entries at k = {preview}{more}")


class ConvergenceFailure(TailcutError):
    pass


class DuplicateName(TailcutError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"selector {name!r} is already registered")


class UnknownName(TailcutError):
    def __init__(self, name: str, kind: str = "name"):
        self.name = name
        super().__init__(f"unknown {kind} {name!r}")


class OutOfRange(TailcutError):
    pass


class InvalidOption(TailcutError):
    def __init__(self, option: str, reason: str):
        self.option = option
        self.reason = reason
        super().__init__(f"{option}: {reason}")


class MalformedInput(TailcutError):
    def __init__(self, reason: str, line: Optional[int] = None):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class EmptyWindow(TailcutError):
    def __init__(self, s: float, size: int, required: int):
        self.s = s
        self.size = size
        self.required = required
        super().__init__(f"window at s={s:.4f} holds {size} usable observations, need {required}")
