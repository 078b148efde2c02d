"""Random witness factories shared by the test modules."""
from __future__ import annotations

import numpy as np

from ncrelay import (Alphabet, CondPmf, DeterministicMap, JointPmf, Pmf, WitnessCF, WitnessCutset,
                     WitnessDF, WitnessGPCF, WitnessGPCFBinned, WitnessGPDF, WitnessGPPDFCF,
                     WitnessPDF)


def simplex(rng, shape, sparse=0.0):
    """Dirichlet rows over the last axis; with `sparse` > 0 some entries are zeroed."""
    p = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])
    if sparse:
        mask = rng.random(p.shape) < sparse
        mask[..., 0] = False
        p = np.where(mask, 0.0, p)
    return p / p.sum(axis=-1, keepdims=True)


def joint(rng, shape):
    p = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return p / p.sum()


def random_df(rng, ch):
    return WitnessDF(JointPmf((ch.x1, ch.x2), joint(rng, (ch.x1.size, ch.x2.size))))


def random_pdf(rng, ch, nv=2):
    v = Alphabet("v", nv)
    return WitnessPDF(JointPmf((v, ch.x1, ch.x2), joint(rng, (nv, ch.x1.size, ch.x2.size))))


def random_cutset(rng, ch):
    return WitnessCutset(Pmf(ch.x1, simplex(rng, (ch.x1.size,))),
                         CondPmf((ch.x1, ch.y2), ch.x2, simplex(rng, (ch.x1.size, ch.y2.size, ch.x2.size))))


def _map(rng, inputs, out):
    return DeterministicMap(tuple(inputs), out, rng.integers(0, out.size, size=tuple(a.size for a in inputs)))


def random_gp_df(rng, ch, nu=2):
    u = Alphabet("u", nu)
    return WitnessGPDF(Pmf(ch.x1, simplex(rng, (ch.x1.size,))),
                       CondPmf((ch.x1, ch.y2), u, simplex(rng, (ch.x1.size, ch.y2.size, nu))),
                       _map(rng, (u, ch.x1, ch.y2), ch.x2))


def random_gp_cf(rng, ch, nu=2):
    u = Alphabet("u", nu)
    return WitnessGPCF(Pmf(ch.x1, simplex(rng, (ch.x1.size,))),
                       CondPmf((ch.y2,), u, simplex(rng, (ch.y2.size, nu))),
                       _map(rng, (u, ch.y2), ch.x2))


def random_binned(rng, ch, nu=2, nyh=2):
    u, yh = Alphabet("u", nu), Alphabet("yhat", nyh)
    return WitnessGPCFBinned(Pmf(ch.x1, simplex(rng, (ch.x1.size,))),
                             CondPmf((ch.y2,), u, simplex(rng, (ch.y2.size, nu))),
                             CondPmf((ch.y2,), yh, simplex(rng, (ch.y2.size, nyh))),
                             _map(rng, (u, yh, ch.y2), ch.x2))


def random_cf(rng, ch, nyh=2):
    yh = Alphabet("yhat", nyh)
    return WitnessCF(Pmf(ch.x1, simplex(rng, (ch.x1.size,))), Pmf(ch.x2, simplex(rng, (ch.x2.size,))),
                     CondPmf((ch.y2,), yh, simplex(rng, (ch.y2.size, nyh))))


def random_gp_pdf_cf(rng, ch, nu=2, nv=2):
    u, v = Alphabet("u", nu), Alphabet("v", nv)
    return WitnessGPPDFCF(JointPmf((v, ch.x1), joint(rng, (nv, ch.x1.size))),
                          CondPmf((v, ch.y2), u, simplex(rng, (nv, ch.y2.size, nu))),
                          _map(rng, (u, v, ch.y2), ch.x2))
