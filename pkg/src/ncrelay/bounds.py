"""Objective evaluators for every capacity bound of the noncausal relay channel.

Each bound is min{terms} of mutual-information expressions evaluated on the
joint induced by a witness. `evaluate_batch` scores many witnesses at once
and is what the optimizer calls; the per-kind `*_objective` functions are
the single-witness public surface and go through the same code.

Rates are in bits. GP-style terms can be negative for poor witnesses; they
are returned as computed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channel as cm
from .channel import NoncausalRelayChannel
from .prob import Table, binary_entropy


class BoundKind(enum.Enum):
    DF = "DF"
    PDF = "PDF"
    CUTSET = "CUTSET"
    GP_DF = "GP_DF"
    GP_CF = "GP_CF"
    GP_CF_BINNED = "GP_CF_BINNED"
    CF = "CF"
    GP_PDF_CF = "GP_PDF_CF"
    NUB = "NUB"
    DEGRADED_CAPACITY = "DEGRADED_CAPACITY"

    @property
    def cli_name(self) -> str:
        return self.value.lower().replace("_", "-")

    @classmethod
    def parse(cls, text: str) -> "BoundKind":
        key = text.strip().upper().replace("-", "_")
        aliases = {"CS": "CUTSET", "CAPACITY": "DEGRADED_CAPACITY"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown bound kind {text!r}") from None

    @property
    def is_lower_bound(self) -> bool:
        return self not in (BoundKind.CUTSET, BoundKind.NUB)


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    terms: tuple[tuple[str, float], ...]

    @classmethod
    def from_terms(cls, names, values) -> "ObjectiveValue":
        terms = tuple((n, float(v)) for n, v in zip(names, values))
        return cls(min(v for _, v in terms), terms)

    def term(self, name: str) -> float:
        return dict(self.terms)[name]


# --- term expressions on batched tables ---------------------------------

def _df_terms(t: Table):
    return [t.mi("x1", "y2"), t.mi("x1,x2", "y3")]


def _pdf_terms(t: Table):
    # second term read as I(V;Y2) + I(X1;Y3|X2,V)
    return [t.mi("x1,x2", "y3"), t.mi("v", "y2") + t.cmi("x1", "y3", "x2,v")]


def _cutset_terms(t: Table):
    return [t.mi("x1,x2", "y3"), t.mi("x1", "y2") + t.cmi("x1", "y3", "x2,y2")]


def _gp_df_terms(t: Table):
    return [t.mi("x1", "y2"), t.mi("x1,u", "y3") - t.cmi("u", "y2", "x1")]


def _nub_terms(t: Table):
    return [t.mi("x1", "y2") + t.cmi("x1", "y3", "x2,y2"),
            t.mi("x1,u", "y3") - t.cmi("u", "y2", "x1")]


def _gp_cf_terms(t: Table):
    return [t.mi("x1", "u,y3"), t.mi("x1,u", "y3") - t.cmi("u", "y2", "x1")]


def _gp_cf_binned_terms(t: Table):
    return [t.mi("x1", "yhat,y3"),
            t.mi("x1,yhat", "y3") - t.cmi("yhat", "y2", "x1") + t.mi("u", "y3") - t.mi("u", "y2")]


def _cf_terms(t: Table):
    return [t.mi("x1", "yhat,y3"),
            t.mi("x1,yhat", "y3") + t.mi("x2", "y3") - t.cmi("yhat", "y2", "x1")]


def _gp_pdf_cf_terms(t: Table):
    a = t.cmi("x1", "u,y3", "v")
    iv = t.mi("v", "y2")
    gp = t.cmi("u", "y2", "v")
    return [t.mi("v,u", "y3") + a - gp,
            iv + a,
            iv + a + t.cmi("u", "y3", "v") - gp]


TERM_NAMES: dict[BoundKind, tuple[str, ...]] = {
    BoundKind.DF: ("I(X1;Y2)", "I(X1,X2;Y3)"),
    BoundKind.PDF: ("I(X1,X2;Y3)", "I(V;Y2)+I(X1;Y3|X2,V)"),
    BoundKind.CUTSET: ("I(X1,X2;Y3)", "I(X1;Y2)+I(X1;Y3|X2,Y2)"),
    BoundKind.GP_DF: ("I(X1;Y2)", "I(X1,U;Y3)-I(U;Y2|X1)"),
    BoundKind.NUB: ("I(X1;Y2)+I(X1;Y3|X2,Y2)", "I(X1,U;Y3)-I(Y2;U|X1)"),
    BoundKind.GP_CF: ("I(X1;U,Y3)", "I(X1,U;Y3)-I(U;Y2|X1)"),
    BoundKind.GP_CF_BINNED: ("I(X1;Yh,Y3)", "I(X1,Yh;Y3)-I(Yh;Y2|X1)+I(U;Y3)-I(U;Y2)"),
    BoundKind.CF: ("I(X1;Yh,Y3)", "I(X1,Yh;Y3)+I(X2;Y3)-I(Yh;Y2|X1)"),
    BoundKind.GP_PDF_CF: ("I(V,U;Y3)+I(X1;U,Y3|V)-I(U;Y2|V)",
                          "I(V;Y2)+I(X1;U,Y3|V)",
                          "I(V;Y2)+I(X1;U,Y3|V)+I(U;Y3|V)-I(U;Y2|V)"),
}

_TENSORS: dict[BoundKind, tuple[Callable, Callable]] = {
    BoundKind.DF: (cm.df_tensor, _df_terms),
    BoundKind.PDF: (cm.pdf_tensor, _pdf_terms),
    BoundKind.CUTSET: (cm.cutset_tensor, _cutset_terms),
    BoundKind.GP_DF: (cm.gp_df_tensor, _gp_df_terms),
    BoundKind.NUB: (cm.gp_df_tensor, _nub_terms),
    BoundKind.GP_CF: (cm.gp_cf_tensor, _gp_cf_terms),
    BoundKind.GP_CF_BINNED: (cm.gp_cf_binned_tensor, _gp_cf_binned_terms),
    BoundKind.CF: (cm.cf_tensor, _cf_terms),
    BoundKind.GP_PDF_CF: (cm.gp_pdf_cf_tensor, _gp_pdf_cf_terms),
}


def evaluate_batch(kind: BoundKind, ch: NoncausalRelayChannel, *arrays) -> np.ndarray:
    """Terms for a batch of raw witnesses; returns shape (B, n_terms)."""
    build, terms = _TENSORS[kind]
    return np.stack(terms(build(ch, *arrays)), axis=1)


def witness_arrays(kind: BoundKind, w) -> tuple[np.ndarray, ...]:
    """The raw arrays (no batch axis) that `evaluate_batch` expects for a witness."""
    if kind is BoundKind.DF:
        return (w.p_x1x2.probs,)
    if kind is BoundKind.PDF:
        return (w.p_vx1x2.probs,)
    if kind is BoundKind.CUTSET:
        return (w.p_x1.probs, w.p_x2_given_x1y2.probs)
    if kind in (BoundKind.GP_DF, BoundKind.NUB, BoundKind.DEGRADED_CAPACITY):
        return (w.p_x1.probs, w.p_u_given_x1y2.probs, w.relay_map.table)
    if kind is BoundKind.GP_CF:
        return (w.p_x1.probs, w.p_u_given_y2.probs, w.relay_map.table)
    if kind is BoundKind.GP_CF_BINNED:
        return (w.p_x1.probs, w.p_u_given_y2.probs, w.p_yhat_given_y2.probs, w.relay_map.table)
    if kind is BoundKind.CF:
        return (w.p_x1.probs, w.p_x2.probs, w.p_yhat_given_y2.probs)
    if kind is BoundKind.GP_PDF_CF:
        return (w.p_vx1.probs, w.p_u_given_vy2.probs, w.relay_map.table)
    raise ValueError(f"no witness layout for {kind}")


_WITNESS_TYPES = {
    BoundKind.DF: cm.WitnessDF,
    BoundKind.PDF: cm.WitnessPDF,
    BoundKind.CUTSET: cm.WitnessCutset,
    BoundKind.GP_DF: cm.WitnessGPDF,
    BoundKind.NUB: cm.WitnessNUB,
    BoundKind.DEGRADED_CAPACITY: cm.WitnessGPDF,
    BoundKind.GP_CF: cm.WitnessGPCF,
    BoundKind.GP_CF_BINNED: cm.WitnessGPCFBinned,
    BoundKind.CF: cm.WitnessCF,
    BoundKind.GP_PDF_CF: cm.WitnessGPPDFCF,
}


def evaluate(kind: BoundKind, ch: NoncausalRelayChannel, w) -> ObjectiveValue:
    if not isinstance(w, _WITNESS_TYPES[kind]):
        raise TypeError(f"{kind.value} needs a {_WITNESS_TYPES[kind].__name__}, got {type(w).__name__}")
    w.validate(ch)
    base = BoundKind.GP_DF if kind is BoundKind.DEGRADED_CAPACITY else kind
    arrays = [a[None] for a in witness_arrays(kind, w)]
    row = evaluate_batch(base, ch, *arrays)[0]
    return ObjectiveValue.from_terms(TERM_NAMES[base], row)


def df_objective(ch, w: cm.WitnessDF) -> ObjectiveValue:
    return evaluate(BoundKind.DF, ch, w)


def pdf_objective(ch, w: cm.WitnessPDF) -> ObjectiveValue:
    return evaluate(BoundKind.PDF, ch, w)


def cutset_objective(ch, w: cm.WitnessCutset) -> ObjectiveValue:
    return evaluate(BoundKind.CUTSET, ch, w)


def gp_df_objective(ch, w: cm.WitnessGPDF) -> ObjectiveValue:
    return evaluate(BoundKind.GP_DF, ch, w)


def gp_cf_objective(ch, w: cm.WitnessGPCF) -> ObjectiveValue:
    return evaluate(BoundKind.GP_CF, ch, w)


def gp_cf_binned_objective(ch, w: cm.WitnessGPCFBinned) -> ObjectiveValue:
    return evaluate(BoundKind.GP_CF_BINNED, ch, w)


def cf_objective(ch, w: cm.WitnessCF) -> ObjectiveValue:
    return evaluate(BoundKind.CF, ch, w)


def gp_pdf_cf_objective(ch, w: cm.WitnessGPPDFCF) -> ObjectiveValue:
    return evaluate(BoundKind.GP_PDF_CF, ch, w)


def nub_objective(ch, w: cm.WitnessNUB) -> ObjectiveValue:
    return evaluate(BoundKind.NUB, ch, w)


# --- closed form for the binary symmetric example ------------------------

class AnalyticFormInapplicable(ValueError):
    pass


def _golden_max(f, lo=0.0, hi=1.0, tol=1e-10) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


def bsc_example_capacity(p1: float, p2: float, p3: float) -> tuple[float, float]:
    """Capacity of the BSC cascade example when the relay map x2 = u xor y2 is optimal.

    Returns (capacity in bits, optimal p_X1(0)). The input coordinate follows
    the closed form's own convention, which is the mirror image (q <-> 1-q)
    of `example_bsc_channel`'s symbol labelling; the value is unaffected.
    """
    for p in (p1, p2, p3):
        if not 0.0 <= p <= 1.0:
            raise AnalyticFormInapplicable(f"parameter {p} outside [0, 1]")
    q1, q2, q3 = 1 - p1, 1 - p2, 1 - p3
    h = binary_entropy
    a, a_alt = h(p1 * q2 + q1 * p3), h(p1 * q2 + q1 * q3)
    b, b_alt = h(q1 * q2 + p1 * p3), h(q1 * q2 + p1 * q3)
    if a > a_alt + 1e-15 or b > b_alt + 1e-15:
        raise AnalyticFormInapplicable(
            "analytic form inapplicable: x2 = u xor y2 is not the minimizing relay map "
            f"for p = ({p1}, {p2}, {p3})")
    h1 = h(p1)

    def f(q):
        return min(h(q * q1 + (1 - q) * p1) - h1, 1 - q * a - (1 - q) * b)

    q = _golden_max(f)
    return f(q), q
