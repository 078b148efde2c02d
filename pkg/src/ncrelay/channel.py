"""Noncausal relay channel, deterministic relay maps, witnesses and joint builders.

The channel factorizes as p(y2|x1) p(y3|x1,x2,y2); the relay sees the whole
block y2^n before transmitting, which is why every relay map below may read
y2 directly.

Each bound has a witness type holding exactly the free objects of its
maximization domain. The `*_tensor` functions build the induced joint for a
whole batch of witnesses at once (leading axis = batch); the public
`build_joint_*` functions wrap them for a single witness.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from .prob import (STOCHASTIC_TOL, Alphabet, CondPmf, JointPmf, Pmf,
                   ProbabilityError, Table)

DEGRADED_TOL = 1e-9

N = None  # broadcasting shorthand


class ChannelError(ValueError):
    pass


class NoncausalRelayChannel:
    """Immutable pair (p(y2|x1), p(y3|x1,x2,y2)) plus the four alphabets."""

    def __init__(self, x1: Alphabet, x2: Alphabet, y2: Alphabet, y3: Alphabet,
                 sender_to_relay: CondPmf, direct: CondPmf):
        for a, name in ((x1, "x1"), (x2, "x2"), (y2, "y2"), (y3, "y3")):
            if a.name != name:
                raise ChannelError(f"alphabet {a.name!r} should be named {name!r}")
        if sender_to_relay.input_axes != (x1,) or sender_to_relay.output_axis != y2:
            raise ChannelError("sender_to_relay must be p(y2|x1) over the channel alphabets")
        if direct.input_axes != (x1, x2, y2) or direct.output_axis != y3:
            raise ChannelError("direct must be p(y3|x1,x2,y2) over the channel alphabets")
        self.x1, self.x2, self.y2, self.y3 = x1, x2, y2, y3
        self.sender_to_relay = sender_to_relay
        self.direct = direct

    # raw arrays, read-only
    @property
    def w2(self) -> np.ndarray:
        return self.sender_to_relay.probs

    @property
    def w3(self) -> np.ndarray:
        return self.direct.probs

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return self.x1.size, self.x2.size, self.y2.size, self.y3.size

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for a in (self.x1, self.x2, self.y2, self.y3):
            h.update(repr((a.name, a.size, a.labels)).encode())
        h.update(np.ascontiguousarray(self.w2).tobytes())
        h.update(np.ascontiguousarray(self.w3).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        return isinstance(other, NoncausalRelayChannel) and self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        return f"NoncausalRelayChannel(sizes={self.sizes}, id={self.fingerprint()[:10]})"

    @classmethod
    def from_arrays(cls, w2, w3, labels: dict[str, Sequence[str]] | None = None):
        """Build from p(y2|x1) of shape (X1, Y2) and p(y3|x1,x2,y2) of shape (X1, X2, Y2, Y3)."""
        w2 = np.asarray(w2, float)
        w3 = np.asarray(w3, float)
        if w2.ndim != 2 or w3.ndim != 4 or w3.shape[0] != w2.shape[0] or w3.shape[2] != w2.shape[1]:
            raise ChannelError(f"inconsistent shapes {w2.shape} and {w3.shape}")
        labels = labels or {}
        sizes = dict(x1=w2.shape[0], x2=w3.shape[1], y2=w2.shape[1], y3=w3.shape[3])
        al = {k: Alphabet(k, v, tuple(labels[k]) if k in labels else None) for k, v in sizes.items()}
        return cls(al["x1"], al["x2"], al["y2"], al["y3"],
                   CondPmf((al["x1"],), al["y2"], w2),
                   CondPmf((al["x1"], al["x2"], al["y2"]), al["y3"], w3))


@dataclass(frozen=True, eq=False)
class DeterministicMap:
    """Lookup table: one output symbol per input tuple, table shape = input sizes."""

    input_axes: tuple[Alphabet, ...]
    output_axis: Alphabet
    table: np.ndarray

    def __post_init__(self):
        input_axes = tuple(self.input_axes)
        t = np.array(self.table)
        if t.shape != tuple(a.size for a in input_axes):
            raise ChannelError(f"map table shape {t.shape} does not match inputs "
                               f"{[a.name for a in input_axes]}")
        if t.size and not np.issubdtype(t.dtype, np.integer):
            if not np.all(t == np.round(t)):
                raise ChannelError("map table entries must be integers")
        t = t.astype(np.int64)
        if t.size and (t.min() < 0 or t.max() >= self.output_axis.size):
            raise ChannelError(f"map outputs out of range for {self.output_axis.name!r}")
        t.setflags(write=False)
        object.__setattr__(self, "input_axes", input_axes)
        object.__setattr__(self, "table", t)

    def __eq__(self, other):
        return (isinstance(other, DeterministicMap) and self.input_axes == other.input_axes
                and self.output_axis == other.output_axis
                and np.array_equal(self.table, other.table))

    __hash__ = None

    def __call__(self, *symbols: int) -> int:
        return int(self.table[symbols])

    def onehot(self) -> np.ndarray:
        return np.eye(self.output_axis.size)[self.table]

    @classmethod
    def constant(cls, input_axes, output_axis, value: int = 0):
        shape = tuple(a.size for a in input_axes)
        return cls(tuple(input_axes), output_axis, np.full(shape, value, dtype=np.int64))


# --- witnesses ------------------------------------------------------------

def _same(a: Alphabet, b: Alphabet, what: str):
    if a.size != b.size or a.name != b.name:
        raise ChannelError(f"{what}: axis {a.name}[{a.size}] does not match channel {b.name}[{b.size}]")


def _check_cond(c: CondPmf, inputs: Sequence[Alphabet], output: Alphabet | str, what: str):
    if len(c.input_axes) != len(inputs):
        raise ChannelError(f"{what}: wrong conditioning {[a.name for a in c.input_axes]}")
    for got, want in zip(c.input_axes, inputs):
        _same(got, want, what)
    if isinstance(output, Alphabet):
        _same(c.output_axis, output, what)
    elif c.output_axis.name != output:
        raise ChannelError(f"{what}: output axis should be {output!r}")


def _check_map(m: DeterministicMap, inputs: Sequence[Alphabet], output: Alphabet, what: str):
    if len(m.input_axes) != len(inputs):
        raise ChannelError(f"{what}: map reads {[a.name for a in m.input_axes]}")
    for got, want in zip(m.input_axes, inputs):
        _same(got, want, what)
    _same(m.output_axis, output, what)


@dataclass(frozen=True, eq=False)
class WitnessDF:
    p_x1x2: JointPmf

    def validate(self, ch: NoncausalRelayChannel):
        if len(self.p_x1x2.axes) != 2:
            raise ChannelError("DF witness needs p(x1,x2)")
        _same(self.p_x1x2.axes[0], ch.x1, "DF witness")
        _same(self.p_x1x2.axes[1], ch.x2, "DF witness")


@dataclass(frozen=True, eq=False)
class WitnessPDF:
    p_vx1x2: JointPmf

    @property
    def v_alphabet(self) -> Alphabet:
        return self.p_vx1x2.axes[0]

    def validate(self, ch: NoncausalRelayChannel):
        ax = self.p_vx1x2.axes
        if len(ax) != 3 or ax[0].name != "v":
            raise ChannelError("PDF witness needs p(v,x1,x2)")
        _same(ax[1], ch.x1, "PDF witness")
        _same(ax[2], ch.x2, "PDF witness")


@dataclass(frozen=True, eq=False)
class WitnessCutset:
    p_x1: Pmf
    p_x2_given_x1y2: CondPmf

    def validate(self, ch: NoncausalRelayChannel):
        _same(self.p_x1.alphabet, ch.x1, "cutset witness")
        _check_cond(self.p_x2_given_x1y2, (ch.x1, ch.y2), ch.x2, "cutset witness")


@dataclass(frozen=True, eq=False)
class WitnessGPDF:
    p_x1: Pmf
    p_u_given_x1y2: CondPmf
    relay_map: DeterministicMap

    @property
    def u_alphabet(self) -> Alphabet:
        return self.p_u_given_x1y2.output_axis

    def validate(self, ch: NoncausalRelayChannel):
        _same(self.p_x1.alphabet, ch.x1, "GP-DF witness")
        _check_cond(self.p_u_given_x1y2, (ch.x1, ch.y2), "u", "GP-DF witness")
        _check_map(self.relay_map, (self.u_alphabet, ch.x1, ch.y2), ch.x2, "GP-DF witness")


WitnessNUB = WitnessGPDF


@dataclass(frozen=True, eq=False)
class WitnessGPCF:
    p_x1: Pmf
    p_u_given_y2: CondPmf
    relay_map: DeterministicMap

    @property
    def u_alphabet(self) -> Alphabet:
        return self.p_u_given_y2.output_axis

    def validate(self, ch: NoncausalRelayChannel):
        _same(self.p_x1.alphabet, ch.x1, "GP-CF witness")
        _check_cond(self.p_u_given_y2, (ch.y2,), "u", "GP-CF witness")
        _check_map(self.relay_map, (self.u_alphabet, ch.y2), ch.x2, "GP-CF witness")


@dataclass(frozen=True, eq=False)
class WitnessGPCFBinned:
    p_x1: Pmf
    p_u_given_y2: CondPmf
    p_yhat_given_y2: CondPmf
    relay_map: DeterministicMap

    @property
    def u_alphabet(self) -> Alphabet:
        return self.p_u_given_y2.output_axis

    @property
    def yhat_alphabet(self) -> Alphabet:
        return self.p_yhat_given_y2.output_axis

    def validate(self, ch: NoncausalRelayChannel):
        _same(self.p_x1.alphabet, ch.x1, "binned GP-CF witness")
        _check_cond(self.p_u_given_y2, (ch.y2,), "u", "binned GP-CF witness")
        _check_cond(self.p_yhat_given_y2, (ch.y2,), "yhat", "binned GP-CF witness")
        _check_map(self.relay_map, (self.u_alphabet, self.yhat_alphabet, ch.y2), ch.x2,
                   "binned GP-CF witness")


@dataclass(frozen=True, eq=False)
class WitnessCF:
    p_x1: Pmf
    p_x2: Pmf
    p_yhat_given_y2: CondPmf

    @property
    def yhat_alphabet(self) -> Alphabet:
        return self.p_yhat_given_y2.output_axis

    def validate(self, ch: NoncausalRelayChannel):
        _same(self.p_x1.alphabet, ch.x1, "CF witness")
        _same(self.p_x2.alphabet, ch.x2, "CF witness")
        _check_cond(self.p_yhat_given_y2, (ch.y2,), "yhat", "CF witness")


@dataclass(frozen=True, eq=False)
class WitnessGPPDFCF:
    p_vx1: JointPmf
    p_u_given_vy2: CondPmf
    relay_map: DeterministicMap

    @property
    def v_alphabet(self) -> Alphabet:
        return self.p_vx1.axes[0]

    @property
    def u_alphabet(self) -> Alphabet:
        return self.p_u_given_vy2.output_axis

    def validate(self, ch: NoncausalRelayChannel):
        ax = self.p_vx1.axes
        if len(ax) != 2 or ax[0].name != "v":
            raise ChannelError("GP-PDF-CF witness needs p(v,x1)")
        _same(ax[1], ch.x1, "GP-PDF-CF witness")
        _check_cond(self.p_u_given_vy2, (self.v_alphabet, ch.y2), "u", "GP-PDF-CF witness")
        _check_map(self.relay_map, (self.u_alphabet, self.v_alphabet, ch.y2), ch.x2,
                   "GP-PDF-CF witness")


# --- batched joint tensors ------------------------------------------------
# Arguments carry a leading batch axis; maps are integer tables (B, *inputs).

def _onehot(table: np.ndarray, size: int) -> np.ndarray:
    return np.eye(size)[table]


def _w3_by_y2(ch: NoncausalRelayChannel) -> np.ndarray:
    # p(y3|x1,x2,y2) laid out as [x1, y2, x2, y3]
    return ch.w3.transpose(0, 2, 1, 3)


DF_AXES = ("x1", "x2", "y2", "y3")
PDF_AXES = ("v", "x1", "x2", "y2", "y3")
CUTSET_AXES = ("x1", "y2", "x2", "y3")
GP_DF_AXES = ("x1", "y2", "u", "x2", "y3")
GP_CF_AXES = GP_DF_AXES
GP_CF_BINNED_AXES = ("x1", "y2", "u", "yhat", "x2", "y3")
CF_AXES = ("x1", "x2", "y2", "yhat", "y3")
GP_PDF_CF_AXES = ("v", "x1", "y2", "u", "x2", "y3")


def df_tensor(ch, p_x1x2) -> Table:
    j = p_x1x2[:, :, :, N, N] * ch.w2[N, :, N, :, N] * ch.w3[N]
    return Table(DF_AXES, j)


def pdf_tensor(ch, p_vx1x2) -> Table:
    j = p_vx1x2[..., N, N] * ch.w2[N, N, :, N, :, N] * ch.w3[N, N]
    return Table(PDF_AXES, j)


def cutset_tensor(ch, p_x1, p_x2_given_x1y2) -> Table:
    j = (p_x1[:, :, N, N, N] * ch.w2[N, :, :, N, N]
         * p_x2_given_x1y2[..., N] * _w3_by_y2(ch)[N])
    return Table(CUTSET_AXES, j)


def gp_df_tensor(ch, p_x1, p_u_given_x1y2, map_u_x1_y2) -> Table:
    oh = _onehot(map_u_x1_y2, ch.x2.size).transpose(0, 2, 3, 1, 4)  # (B, x1, y2, u, x2)
    j = (p_x1[:, :, N, N, N, N] * ch.w2[N, :, :, N, N, N]
         * p_u_given_x1y2[..., N, N] * oh[..., N] * _w3_by_y2(ch)[N, :, :, N])
    return Table(GP_DF_AXES, j)


def gp_cf_tensor(ch, p_x1, p_u_given_y2, map_u_y2) -> Table:
    oh = _onehot(map_u_y2, ch.x2.size).transpose(0, 2, 1, 3)  # (B, y2, u, x2)
    j = (p_x1[:, :, N, N, N, N] * ch.w2[N, :, :, N, N, N]
         * p_u_given_y2[:, N, :, :, N, N] * oh[:, N, ..., N] * _w3_by_y2(ch)[N, :, :, N])
    return Table(GP_CF_AXES, j)


def gp_cf_binned_tensor(ch, p_x1, p_u_given_y2, p_yhat_given_y2, map_u_yhat_y2) -> Table:
    oh = _onehot(map_u_yhat_y2, ch.x2.size).transpose(0, 3, 1, 2, 4)  # (B, y2, u, yhat, x2)
    j = (p_x1[:, :, N, N, N, N, N] * ch.w2[N, :, :, N, N, N, N]
         * p_u_given_y2[:, N, :, :, N, N, N] * p_yhat_given_y2[:, N, :, N, :, N, N]
         * oh[:, N, ..., N] * _w3_by_y2(ch)[N, :, :, N, N])
    return Table(GP_CF_BINNED_AXES, j)


def cf_tensor(ch, p_x1, p_x2, p_yhat_given_y2) -> Table:
    j = (p_x1[:, :, N, N, N, N] * p_x2[:, N, :, N, N, N] * ch.w2[N, :, N, :, N, N]
         * p_yhat_given_y2[:, N, N, :, :, N] * ch.w3[N, :, :, :, N, :])
    return Table(CF_AXES, j)


def gp_pdf_cf_tensor(ch, p_vx1, p_u_given_vy2, map_u_v_y2) -> Table:
    oh = _onehot(map_u_v_y2, ch.x2.size).transpose(0, 2, 3, 1, 4)  # (B, v, y2, u, x2)
    j = (p_vx1[:, :, :, N, N, N, N] * ch.w2[N, N, :, :, N, N, N]
         * p_u_given_vy2[:, :, N, :, :, N, N] * oh[:, :, N, ..., N]
         * _w3_by_y2(ch)[N, N, :, :, N])
    return Table(GP_PDF_CF_AXES, j)


# --- public builders ------------------------------------------------------

def _joint(ch, names: Sequence[str], table: Table, extra: dict[str, Alphabet]) -> JointPmf:
    lookup = {"x1": ch.x1, "x2": ch.x2, "y2": ch.y2, "y3": ch.y3, **extra}
    return JointPmf(tuple(lookup[n] for n in names), table.probs[0])


def build_joint_df(ch: NoncausalRelayChannel, w: WitnessDF) -> JointPmf:
    w.validate(ch)
    return _joint(ch, DF_AXES, df_tensor(ch, w.p_x1x2.probs[N]), {})


def build_joint_pdf(ch: NoncausalRelayChannel, w: WitnessPDF) -> JointPmf:
    w.validate(ch)
    return _joint(ch, PDF_AXES, pdf_tensor(ch, w.p_vx1x2.probs[N]), {"v": w.v_alphabet})


def build_joint_cutset(ch: NoncausalRelayChannel, w: WitnessCutset) -> JointPmf:
    w.validate(ch)
    t = cutset_tensor(ch, w.p_x1.probs[N], w.p_x2_given_x1y2.probs[N])
    return _joint(ch, CUTSET_AXES, t, {})


def build_joint_gp_df(ch: NoncausalRelayChannel, w: WitnessGPDF) -> JointPmf:
    w.validate(ch)
    t = gp_df_tensor(ch, w.p_x1.probs[N], w.p_u_given_x1y2.probs[N], w.relay_map.table[N])
    return _joint(ch, GP_DF_AXES, t, {"u": w.u_alphabet})


def build_joint_gp_cf(ch: NoncausalRelayChannel, w: WitnessGPCF) -> JointPmf:
    w.validate(ch)
    t = gp_cf_tensor(ch, w.p_x1.probs[N], w.p_u_given_y2.probs[N], w.relay_map.table[N])
    return _joint(ch, GP_CF_AXES, t, {"u": w.u_alphabet})


def build_joint_gp_cf_binned(ch: NoncausalRelayChannel, w: WitnessGPCFBinned) -> JointPmf:
    w.validate(ch)
    t = gp_cf_binned_tensor(ch, w.p_x1.probs[N], w.p_u_given_y2.probs[N],
                            w.p_yhat_given_y2.probs[N], w.relay_map.table[N])
    return _joint(ch, GP_CF_BINNED_AXES, t, {"u": w.u_alphabet, "yhat": w.yhat_alphabet})


def build_joint_cf(ch: NoncausalRelayChannel, w: WitnessCF) -> JointPmf:
    w.validate(ch)
    t = cf_tensor(ch, w.p_x1.probs[N], w.p_x2.probs[N], w.p_yhat_given_y2.probs[N])
    return _joint(ch, CF_AXES, t, {"yhat": w.yhat_alphabet})


def build_joint_gp_pdf_cf(ch: NoncausalRelayChannel, w: WitnessGPPDFCF) -> JointPmf:
    w.validate(ch)
    t = gp_pdf_cf_tensor(ch, w.p_vx1.probs[N], w.p_u_given_vy2.probs[N], w.relay_map.table[N])
    return _joint(ch, GP_PDF_CF_AXES, t, {"v": w.v_alphabet, "u": w.u_alphabet})


# --- channel properties and examples -------------------------------------

def is_degraded(ch: NoncausalRelayChannel, tol: float = DEGRADED_TOL) -> bool:
    """True iff p(y3|x1,x2,y2) does not depend on x1 (up to `tol`)."""
    if tol <= 0:
        raise ChannelError("degradedness tolerance must be positive")
    w3 = ch.w3
    return bool((w3.max(axis=0) - w3.min(axis=0)).max() <= tol)


def _complement(p: float) -> float:
    # 1 - p in decimal, so that e.g. 0.55 -> 0.45 exactly as a file would spell it
    return float(Decimal(1) - Decimal(repr(float(p))))


def _bsc(p: float) -> list[list[float]]:
    q = _complement(p)
    return [[q, p], [p, q]]


def example_bec_channel() -> NoncausalRelayChannel:
    """BEC(1/2) to the relay; relay-to-receiver link clean unless y2 is an erasure, then stuck at 1."""
    w2 = [[0.5, 0.0, 0.5],
          [0.0, 0.5, 0.5]]
    w3 = np.zeros((2, 2, 3, 2))
    for x1 in range(2):
        for x2 in range(2):
            w3[x1, x2, 0, x2] = 1.0
            w3[x1, x2, 1, x2] = 1.0
            w3[x1, x2, 2, 1] = 1.0
    return NoncausalRelayChannel.from_arrays(w2, w3, labels={"y2": ("0", "1", "e")})


def example_bsc_channel(p1: float, p2: float, p3: float) -> NoncausalRelayChannel:
    """BSC(p1) to the relay; relay-to-receiver BSC(p2) when y2 = 0 and BSC(p3) when y2 = 1."""
    for name, p in (("p1", p1), ("p2", p2), ("p3", p3)):
        if not 0.0 <= p <= 1.0:
            raise ChannelError(f"{name} = {p} outside [0, 1]")
    w3 = np.zeros((2, 2, 2, 2))
    for x1 in range(2):
        w3[x1, :, 0, :] = _bsc(p2)
        w3[x1, :, 1, :] = _bsc(p3)
    return NoncausalRelayChannel.from_arrays(_bsc(p1), w3)


def random_channel(rng: np.random.Generator, sizes=(2, 2, 2, 2), degraded: bool = False,
                   concentration: float = 1.0) -> NoncausalRelayChannel:
    """Dirichlet-distributed rows; `sizes` is (|X1|, |X2|, |Y2|, |Y3|)."""
    nx1, nx2, ny2, ny3 = sizes
    w2 = rng.dirichlet(np.full(ny2, concentration), size=nx1)
    if degraded:
        w3 = np.broadcast_to(rng.dirichlet(np.full(ny3, concentration), size=(nx2, ny2)),
                             (nx1, nx2, ny2, ny3)).copy()
    else:
        w3 = rng.dirichlet(np.full(ny3, concentration), size=(nx1, nx2, ny2))
    # exact row sums for the 1e-12 validator
    w2 /= w2.sum(axis=-1, keepdims=True)
    w3 /= w3.sum(axis=-1, keepdims=True)
    return NoncausalRelayChannel.from_arrays(w2, w3)


def induced_relay_conditional(ch: NoncausalRelayChannel, w: WitnessGPDF) -> CondPmf:
    """p(x2|x1,y2) = sum_u p(u|x1,y2) 1{x2 = map(u,x1,y2)}."""
    w.validate(ch)
    oh = w.relay_map.onehot()  # (u, x1, y2, x2)
    c = np.einsum("iju,uijk->ijk", w.p_u_given_x1y2.probs, oh)
    c /= c.sum(axis=-1, keepdims=True)
    return CondPmf((ch.x1, ch.y2), ch.x2, c)


__all__ = [
    "ChannelError", "NoncausalRelayChannel", "DeterministicMap",
    "WitnessDF", "WitnessPDF", "WitnessCutset", "WitnessGPDF", "WitnessNUB", "WitnessGPCF",
    "WitnessGPCFBinned", "WitnessCF", "WitnessGPPDFCF",
    "build_joint_df", "build_joint_pdf", "build_joint_cutset", "build_joint_gp_df",
    "build_joint_gp_cf", "build_joint_gp_cf_binned", "build_joint_cf", "build_joint_gp_pdf_cf",
    "is_degraded", "example_bec_channel", "example_bsc_channel", "random_channel",
    "induced_relay_conditional", "STOCHASTIC_TOL", "ProbabilityError",
]
