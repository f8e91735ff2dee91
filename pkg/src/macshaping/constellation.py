"""Constellations, bit labels and the XOR-class index of the superposed signal.

User A transmits a point of the constellation, user B either the 90-degree
rotated copy (PAM orthogonal pair) or the same 2-D constellation (QAM).  The
receiver only wants ``label_A XOR label_B``, so the superposed points are
grouped into M classes of M index pairs each.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import re

import numpy as np

PAM = "pam-orthogonal-pair"
QAM = "qam"

# per-axis Gray sequence over ascending amplitude (-3, -1, 1, 3)
GRAY4 = (0b00, 0b01, 0b11, 0b10)


class InvalidArgument(ValueError):
    """Raised when an argument violates a documented precondition."""


@dataclass(frozen=True)
class Constellation:
    points: np.ndarray  # complex, shape (M,)
    labels: np.ndarray  # int, shape (M,)
    family: str
    m: int
    name: str = ""

    def __post_init__(self):
        M = 2 ** self.m
        pts = np.asarray(self.points, dtype=complex)
        labels = np.asarray(self.labels, dtype=np.int64)
        if pts.shape != (M,) or labels.shape != (M,):
            raise InvalidArgument(f"expected {M} points and labels")
        if sorted(labels.tolist()) != list(range(M)):
            raise InvalidArgument("labels must be a permutation of 0..M-1")
        if len(set(pts.tolist())) != M:
            raise InvalidArgument("points must be pairwise distinct")
        if self.family not in (PAM, QAM):
            raise InvalidArgument(f"unknown family {self.family!r}")
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def M(self) -> int:
        return 2 ** self.m

    @property
    def signal_dimensions(self) -> int:
        return 1 if self.family == PAM else 2

    @property
    def energies(self) -> np.ndarray:
        return np.abs(self.points) ** 2

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "m": self.m,
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "labels": [int(v) for v in self.labels],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Constellation":
        pts = np.array([complex(re_, im_) for re_, im_ in obj["points"]])
        return cls(pts, np.array(obj["labels"]), obj["family"], int(obj["m"]),
                   obj.get("name", ""))


def make_pam(m: int) -> Constellation:
    """2^m-PAM with points -M+1, ..., M-1 and natural labels."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 8:
        raise InvalidArgument(f"m must be an integer in [1, 8], got {m!r}")
    M = 2 ** m
    pts = np.arange(-M + 1, M, 2).astype(complex)
    return Constellation(pts, np.arange(M), PAM, int(m), f"pam{M}")


def make_qam16_gray(q_high: bool = False) -> Constellation:
    """Square 16-QAM with per-axis Gray labels.

    In-phase bits are the high pair unless ``q_high`` is set.
    """
    amps = (-3, -1, 1, 3)
    pts, labels = [], []
    for i, re_ in enumerate(amps):
        for j, im_ in enumerate(amps):
            pts.append(complex(re_, im_))
            hi, lo = (GRAY4[j], GRAY4[i]) if q_high else (GRAY4[i], GRAY4[j])
            labels.append((hi << 2) | lo)
    name = "qam16-gray-qhigh" if q_high else "qam16-gray"
    return Constellation(np.array(pts), np.array(labels), QAM, 4, name)


def make_qam16_natural() -> Constellation:
    """16-QAM with binary-counting per-axis labels (I bits high)."""
    amps = (-3, -1, 1, 3)
    pts = [complex(a, b) for a in amps for b in amps]
    labels = [(i << 2) | j for i in range(4) for j in range(4)]
    return Constellation(np.array(pts), np.array(labels), QAM, 4, "qam16-natural")


_PAM_RE = re.compile(r"^pam(\d+)$")


def get_constellation(name: str) -> Constellation:
    """Resolve a CLI identifier (``pam2`` ... ``pam256``, ``qam16-gray``)."""
    key = name.strip().lower()
    if key == "qam16-gray":
        return make_qam16_gray()
    if key == "qam16-gray-qhigh":
        return make_qam16_gray(q_high=True)
    if key == "qam16-natural":
        return make_qam16_natural()
    mt = _PAM_RE.match(key)
    if mt:
        M = int(mt.group(1))
        if M >= 2 and M & (M - 1) == 0:
            return make_pam(M.bit_length() - 1)
    raise InvalidArgument(f"unknown constellation {name!r}")


@dataclass
class XorClassIndex:
    """All M^2 index pairs grouped by the XOR of their labels.

    Flat arrays are stored class-major: entries ``i*M .. (i+1)*M-1`` belong to
    class ``i``.
    """
    constellation: Constellation
    k: np.ndarray
    l: np.ndarray
    cls: np.ndarray
    x_ab: np.ndarray
    ambiguity_free: bool | None = None
    collisions: list = field(default_factory=list)

    @property
    def M(self) -> int:
        return self.constellation.M

    @property
    def classes(self) -> list[list[tuple[int, int, complex]]]:
        M = self.M
        return [
            [(int(self.k[e]), int(self.l[e]), complex(self.x_ab[e]))
             for e in range(i * M, (i + 1) * M)]
            for i in range(M)
        ]

    def members(self, i: int) -> slice:
        return slice(i * self.M, (i + 1) * self.M)

    def weights(self, p, q) -> np.ndarray:
        """Per-entry joint probability p_k q_l."""
        return np.asarray(p)[self.k] * np.asarray(q)[self.l]


def superpose(c: Constellation, k, l) -> np.ndarray:
    if c.family == PAM:
        return c.points[k] + 1j * c.points[l]
    return c.points[k] + c.points[l]


def build_xor_classes(c: Constellation) -> XorClassIndex:
    M = c.M
    inv = np.empty(M, dtype=np.int64)
    inv[c.labels] = np.arange(M)
    # class i, user-A index k -> user-B index with label labels[k] ^ i
    cls = np.repeat(np.arange(M), M)
    k = np.tile(np.arange(M), M)
    l = inv[c.labels[k] ^ cls]
    return XorClassIndex(c, k, l, cls, superpose(c, k, l))


def check_ambiguity_free(x: XorClassIndex) -> bool:
    """True iff no superposed point is shared by two different classes.

    Superposed points lie on the integer lattice, so they are compared after
    rounding.  Colliding witnesses ``((k, l), (k', l'))`` are kept on
    ``x.collisions``.
    """
    seen: dict[tuple[int, int], int] = {}
    collisions = []
    for e in range(len(x.cls)):
        z = x.x_ab[e]
        key = (int(np.rint(z.real)), int(np.rint(z.imag)))
        first = seen.setdefault(key, e)
        if x.cls[first] != x.cls[e]:
            collisions.append(((int(x.k[first]), int(x.l[first])),
                               (int(x.k[e]), int(x.l[e]))))
    x.collisions = collisions
    x.ambiguity_free = not collisions
    return x.ambiguity_free
