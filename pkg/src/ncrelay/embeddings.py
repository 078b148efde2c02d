"""Witness embeddings between bound shapes.

Each function maps a witness of a poorer scheme into the domain of a richer
one so that the richer objective reproduces (or dominates) the poorer value.
They seed the optimizer and back the reduction tests.
"""
from __future__ import annotations

import numpy as np

from .channel import (ChannelError, DeterministicMap, NoncausalRelayChannel, WitnessCF,
                      WitnessCutset, WitnessDF, WitnessGPCF, WitnessGPCFBinned, WitnessGPDF,
                      WitnessGPPDFCF, WitnessPDF, induced_relay_conditional)
from .prob import Alphabet, CondPmf, JointPmf, Pmf


def conditional_from_joint(p: np.ndarray) -> np.ndarray:
    """Normalize the last axis; rows with no mass become uniform."""
    s = p.sum(axis=-1, keepdims=True)
    out = np.where(s > 0, p / np.where(s > 0, s, 1.0), 1.0 / p.shape[-1])
    return out / out.sum(axis=-1, keepdims=True)


def _pad(cond: np.ndarray, size: int) -> np.ndarray:
    extra = size - cond.shape[-1]
    if extra < 0:
        raise ChannelError(f"auxiliary alphabet of size {size} cannot hold {cond.shape[-1]} symbols")
    pad = [(0, 0)] * (cond.ndim - 1) + [(0, extra)]
    return np.pad(cond, pad)


def _copy_map(inputs, output, n_copy: int, axis: int) -> DeterministicMap:
    """Map that copies input `axis` (symbols >= n_copy sent to 0)."""
    shape = tuple(a.size for a in inputs)
    idx = np.indices(shape)[axis]
    return DeterministicMap(tuple(inputs), output, np.where(idx < n_copy, idx, 0))


def df_to_gp_df(ch: NoncausalRelayChannel, w: WitnessDF, card_u: int | None = None) -> WitnessGPDF:
    """U = X2 drawn from p(x2|x1) independently of Y2, relay sends x2 = u."""
    w.validate(ch)
    card_u = card_u or ch.x2.size
    u = Alphabet("u", card_u)
    p = w.p_x1x2.probs
    p_x1 = p.sum(axis=1)
    cond = _pad(conditional_from_joint(p), card_u)  # (x1, u)
    p_u = np.broadcast_to(cond[:, None, :], (ch.x1.size, ch.y2.size, card_u))
    return WitnessGPDF(Pmf(ch.x1, p_x1 / p_x1.sum()),
                       CondPmf((ch.x1, ch.y2), u, p_u),
                       _copy_map((u, ch.x1, ch.y2), ch.x2, ch.x2.size, 0))


def gp_cf_to_gp_df(ch: NoncausalRelayChannel, w: WitnessGPCF) -> WitnessGPDF:
    w.validate(ch)
    u = w.u_alphabet
    p_u = np.broadcast_to(w.p_u_given_y2.probs[None], (ch.x1.size, ch.y2.size, u.size))
    table = np.broadcast_to(w.relay_map.table[:, None, :], (u.size, ch.x1.size, ch.y2.size))
    return WitnessGPDF(w.p_x1, CondPmf((ch.x1, ch.y2), u, p_u),
                       DeterministicMap((u, ch.x1, ch.y2), ch.x2, table))


def gp_cf_to_gp_pdf_cf(ch: NoncausalRelayChannel, w: WitnessGPCF, card_v: int = 1) -> WitnessGPPDFCF:
    """V constant (all mass on v = 0)."""
    w.validate(ch)
    v = Alphabet("v", card_v)
    u = w.u_alphabet
    p_vx1 = np.zeros((card_v, ch.x1.size))
    p_vx1[0] = w.p_x1.probs
    p_u = np.broadcast_to(w.p_u_given_y2.probs[None], (card_v, ch.y2.size, u.size))
    table = np.broadcast_to(w.relay_map.table[:, None, :], (u.size, card_v, ch.y2.size))
    return WitnessGPPDFCF(JointPmf((v, ch.x1), p_vx1), CondPmf((v, ch.y2), u, p_u),
                          DeterministicMap((u, v, ch.y2), ch.x2, table))


def pdf_to_gp_pdf_cf(ch: NoncausalRelayChannel, w: WitnessPDF) -> WitnessGPPDFCF:
    """New V = (V, X2) flattened as v * |X2| + x2; U constant; relay sends the X2 part."""
    w.validate(ch)
    nv, nx1, nx2 = w.p_vx1x2.probs.shape
    v = Alphabet("v", nv * nx2)
    u = Alphabet("u", 1)
    p_vx1 = w.p_vx1x2.probs.transpose(0, 2, 1).reshape(nv * nx2, nx1)
    p_u = np.ones((nv * nx2, ch.y2.size, 1))
    table = np.broadcast_to((np.arange(nv * nx2) % nx2)[None, :, None], (1, nv * nx2, ch.y2.size))
    return WitnessGPPDFCF(JointPmf((v, ch.x1), p_vx1), CondPmf((v, ch.y2), u, p_u),
                          DeterministicMap((u, v, ch.y2), ch.x2, table))


def gp_cf_to_binned(ch: NoncausalRelayChannel, w: WitnessGPCF, card_u: int = 1) -> WitnessGPCFBinned:
    """Binned U constant; the GP-CF auxiliary becomes the compression variable."""
    w.validate(ch)
    u = Alphabet("u", card_u)
    yhat = Alphabet("yhat", w.u_alphabet.size)
    p_u = np.zeros((ch.y2.size, card_u))
    p_u[:, 0] = 1.0
    table = np.broadcast_to(w.relay_map.table[None], (card_u, yhat.size, ch.y2.size))
    return WitnessGPCFBinned(w.p_x1, CondPmf((ch.y2,), u, p_u),
                             CondPmf((ch.y2,), yhat, w.p_u_given_y2.probs),
                             DeterministicMap((u, yhat, ch.y2), ch.x2, table))


def cf_to_binned(ch: NoncausalRelayChannel, w: WitnessCF, card_u: int | None = None) -> WitnessGPCFBinned:
    """U independent of Y2 with the law of X2, relay sends x2 = u."""
    w.validate(ch)
    card_u = card_u or ch.x2.size
    u = Alphabet("u", card_u)
    p_u = np.broadcast_to(_pad(w.p_x2.probs, card_u)[None], (ch.y2.size, card_u))
    yhat = w.yhat_alphabet
    return WitnessGPCFBinned(w.p_x1, CondPmf((ch.y2,), u, p_u), w.p_yhat_given_y2,
                             _copy_map((u, yhat, ch.y2), ch.x2, ch.x2.size, 0))


def df_to_pdf(ch: NoncausalRelayChannel, w: WitnessDF, card_v: int | None = None) -> WitnessPDF:
    """V = X1."""
    w.validate(ch)
    card_v = card_v or ch.x1.size
    if card_v < ch.x1.size:
        raise ChannelError("V must be at least as large as X1 to copy it")
    p = np.zeros((card_v,) + w.p_x1x2.probs.shape)
    for x1 in range(ch.x1.size):
        p[x1, x1] = w.p_x1x2.probs[x1]
    return WitnessPDF(JointPmf((Alphabet("v", card_v), ch.x1, ch.x2), p))


def df_to_cutset(ch: NoncausalRelayChannel, w: WitnessDF) -> WitnessCutset:
    w.validate(ch)
    p = w.p_x1x2.probs
    cond = conditional_from_joint(p)
    c = np.broadcast_to(cond[:, None, :], (ch.x1.size, ch.y2.size, ch.x2.size))
    return WitnessCutset(Pmf(ch.x1, p.sum(axis=1)), CondPmf((ch.x1, ch.y2), ch.x2, c))


def gp_df_to_cutset(ch: NoncausalRelayChannel, w: WitnessGPDF) -> WitnessCutset:
    """Keep p(x1); the relay's input law is the one induced by p(u|x1,y2) and the map."""
    return WitnessCutset(w.p_x1, induced_relay_conditional(ch, w))
