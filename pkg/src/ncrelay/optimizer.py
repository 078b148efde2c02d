"""Numerical maximization of the bound objectives.

Search has two phases. A grid phase scores every (relay map, grid point)
pair in large vectorized batches. The best few maps, plus any seed witnesses,
then go through a pattern-search refinement on the simplex product.

Relay maps are enumerated up to relabelings of the auxiliary alphabets that
leave the objective invariant, so equivalent maps are scored once and the
reported witness always carries the lexicographically smallest table of its
class.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import minimize

from . import embeddings as emb
from .bounds import TERM_NAMES, BoundKind, ObjectiveValue, evaluate, evaluate_batch, witness_arrays
from .channel import (DeterministicMap, NoncausalRelayChannel, WitnessCF, WitnessCutset, WitnessDF,
                      WitnessGPCF, WitnessGPCFBinned, WitnessGPDF, WitnessGPPDFCF, WitnessPDF,
                      is_degraded)
from .prob import Alphabet, CondPmf, JointPmf, Pmf

_ACCEPT = 1e-13      # smallest improvement a refinement move must make
_TIE = 1e-9          # final candidates closer than this count as tied
_CHUNK_ROWS = 16384  # rows per vectorized grid evaluation
_GROUP_CAP = 5040    # beyond this many relabelings fall back to global ones


class ConfigError(ValueError):
    pass


class NotDegradedError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    grid_resolution: int = 8
    refine_iterations: int = 400
    refine_initial_step: float = 0.05
    tolerance: float = 1e-6
    card_u: int = 2
    card_v: int = 2
    card_yhat: int = 2
    map_enumeration_cap: int = 65536
    seed: int = 0
    grid_point_cap: int = 8192   # grid points per relay map
    refine_top: int = 8          # grid winners carried into refinement
    random_directions: int = 16  # random moves tried per refinement step
    screen_grid_cap: int = 512   # coarse grid used to shortlist relay maps
    screen_keep: int = 64        # maps surviving the coarse screen
    polish: bool = True          # epigraph SLSQP after the pattern search

    def __post_init__(self):
        ints = dict(grid_resolution=1, refine_iterations=0, card_u=1, card_v=1, card_yhat=1,
                    map_enumeration_cap=1, grid_point_cap=1, refine_top=1, random_directions=0,
                    screen_grid_cap=1, screen_keep=1)
        for name, lo in ints.items():
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
        if not self.refine_initial_step > 0:
            raise ConfigError("refine_initial_step must be positive")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")


@dataclass(frozen=True, eq=False)
class BoundResult:
    kind: BoundKind
    value: float
    witness: object
    terms: ObjectiveValue
    evaluations: int
    converged: bool


# --- simplex grids and map enumeration --------------------------------------

def _compositions(dim: int, k: int) -> Iterator[tuple[int, ...]]:
    if dim == 1:
        yield (k,)
        return
    for a in range(k + 1):
        for rest in _compositions(dim - 1, k - a):
            yield (a,) + rest


def simplex_grid(dim: int, k: int) -> np.ndarray:
    """All pmfs on `dim` points with entries in {0, 1/k, ..., 1}, rows in lexicographic order."""
    if dim < 1 or k < 1:
        raise ConfigError("simplex grid needs dim >= 1 and k >= 1")
    return np.array(list(_compositions(dim, k)), dtype=float) / k


def _grid_count(dim: int, k: int) -> int:
    return math.comb(k + dim - 1, dim - 1)


def _encode(tables: np.ndarray, codomain: int) -> np.ndarray:
    powers = codomain ** np.arange(tables.shape[1] - 1, -1, -1, dtype=np.int64)
    return tables @ powers


def _decode(codes: np.ndarray, width: int, codomain: int) -> np.ndarray:
    powers = codomain ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % codomain


def _lex_min_rows(candidates: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise lexicographic minimum over a list of (M, D) arrays; also returns the winner index."""
    best = candidates[0].copy()
    arg = np.zeros(len(best), dtype=int)
    for g, c in enumerate(candidates[1:], start=1):
        diff = c != best
        first = diff.argmax(axis=1)
        rows = np.arange(len(best))
        less = diff.any(axis=1) & (c[rows, first] < best[rows, first])
        best[less] = c[less]
        arg[less] = g
    return best, arg


def _special_tables(shape: tuple[int, ...], codomain: int) -> np.ndarray:
    """Constant maps and one projection (mod codomain) per input axis."""
    flat = [np.full(int(np.prod(shape)), c) for c in range(codomain)]
    idx = np.indices(shape)
    flat += [(idx[a] % codomain).ravel() for a in range(len(shape))]
    return np.array(flat, dtype=np.int64)


def _map_tables(shape: tuple[int, ...], codomain: int, cap: int, rng: np.random.Generator,
                perms: Sequence[np.ndarray]) -> tuple[np.ndarray, bool]:
    """Canonical map tables (flattened, sorted lexicographically); flag tells if sampled.

    `perms` are position permutations of the flattened table under which the
    objective is invariant (identity included).
    """
    width = int(np.prod(shape))
    count = codomain ** width
    if count <= cap:
        codes = np.arange(count, dtype=np.int64)
        tables = _decode(codes, width, codomain)
        canon = np.min([_encode(tables[:, p], codomain) for p in perms], axis=0)
        return tables[codes == canon], False
    sample = rng.integers(0, codomain, size=(cap, width))
    tables = np.concatenate([_special_tables(shape, codomain), sample])
    tables, _ = _lex_min_rows([tables[:, p] for p in perms])
    return np.unique(tables, axis=0), True


def enumerate_maps(domain_size: int, codomain_size: int, cap: int = 65536, seed: int = 0,
                   input_axes: Sequence[Alphabet] | None = None,
                   output_axis: Alphabet | None = None) -> Iterator[DeterministicMap]:
    """Every map domain -> codomain in lexicographic order, or a seeded sample when
    there are more than `cap` of them (constants and projections always included)."""
    if domain_size < 1 or codomain_size < 1 or cap < 1:
        raise ConfigError("enumerate_maps needs positive sizes and cap")
    if input_axes is None:
        input_axes = (Alphabet("domain", domain_size),)
    input_axes = tuple(input_axes)
    shape = tuple(a.size for a in input_axes)
    if int(np.prod(shape)) != domain_size:
        raise ConfigError("input axes do not multiply to domain_size")
    output_axis = output_axis or Alphabet("codomain", codomain_size)
    ident = np.arange(domain_size)
    tables, _ = _map_tables(shape, codomain_size, cap, np.random.default_rng(seed), [ident])
    for t in tables:
        yield DeterministicMap(input_axes, output_axis, t.reshape(shape))


# --- search domains ------------------------------------------------------------

@dataclass
class _Domain:
    kind: BoundKind
    blocks: list[tuple[tuple[int, ...], int]]  # (array shape, number of trailing simplex axes)
    map_shape: tuple[int, ...] | None = None
    codomain: int = 1
    # each relabeling acts on (arrays, table) and returns the relabeled pair
    group: list[Callable] = field(default_factory=list)

    def __post_init__(self):
        self.offsets, self.rows = [], []
        off = 0
        for shape, s in self.blocks:
            size = int(np.prod(shape))
            dim = int(np.prod(shape[len(shape) - s:]))
            self.offsets.append(off)
            self.rows.append((size // dim, dim))
            off += size
        self.size = off

    def split(self, P: np.ndarray) -> list[np.ndarray]:
        B = P.shape[0]
        return [P[:, o:o + int(np.prod(shape))].reshape((B,) + shape)
                for o, (shape, _) in zip(self.offsets, self.blocks)]

    def flatten(self, arrays) -> np.ndarray | None:
        parts = []
        for a, (shape, _) in zip(arrays, self.blocks):
            a = np.asarray(a, float)
            if a.shape != shape:
                return None
            parts.append(a.ravel())
        return np.concatenate(parts)

    def normalize(self, P: np.ndarray) -> np.ndarray:
        P = np.maximum(P, 0.0)
        out = np.empty_like(P)
        for o, (r, d) in zip(self.offsets, self.rows):
            x = P[:, o:o + r * d].reshape(-1, r, d)
            s = x.sum(axis=-1, keepdims=True)
            x = np.where(s > 0, x / np.where(s > 0, s, 1.0), 1.0 / d)
            out[:, o:o + r * d] = x.reshape(-1, r * d)
        return out

    def uniform(self) -> np.ndarray:
        return np.concatenate([np.full(r * d, 1.0 / d) for r, d in self.rows])

    def map_perms(self) -> list[np.ndarray]:
        if self.map_shape is None:
            return []
        idx = np.arange(int(np.prod(self.map_shape))).reshape(self.map_shape)
        return [g(None, idx)[1].ravel() for g in self.group]


def _perm_products(n: int, copies: int) -> list[tuple[np.ndarray, ...]]:
    perms = [np.array(p) for p in itertools.permutations(range(n))]
    if math.factorial(n) ** copies > _GROUP_CAP:
        return [(p,) * copies for p in perms]
    return list(itertools.product(perms, repeat=copies))


def _gp_df_group(nu: int, nx1: int) -> list[Callable]:
    # U may be relabeled separately for every x1: terms only see (X1,U) jointly or U given X1
    out = []
    for invs in _perm_products(nu, nx1):
        def act(arrays, table, invs=invs):
            t = table.copy()
            for x1, inv in enumerate(invs):
                t[:, x1, :] = table[inv, x1, :]
            if arrays is None:
                return None, t
            p_x1, pu = arrays
            pu = np.stack([pu[x1][:, inv] for x1, inv in enumerate(invs)])
            return [p_x1, pu], t
        out.append(act)
    return out


def _gp_cf_group(nu: int) -> list[Callable]:
    out = []
    for (inv,) in _perm_products(nu, 1):
        def act(arrays, table, inv=inv):
            t = table[inv]
            if arrays is None:
                return None, t
            return [arrays[0], arrays[1][:, inv]], t
        out.append(act)
    return out


def _binned_group(nu: int, nyh: int) -> list[Callable]:
    out = []
    for (iu,), (iy,) in itertools.product(_perm_products(nu, 1), _perm_products(nyh, 1)):
        def act(arrays, table, iu=iu, iy=iy):
            t = table[iu][:, iy]
            if arrays is None:
                return None, t
            return [arrays[0], arrays[1][:, iu], arrays[2][:, iy]], t
        out.append(act)
    return out


def _gp_pdf_cf_group(nu: int, nv: int) -> list[Callable]:
    # global relabeling of V, then U relabeled separately for each (new) v
    out = []
    for (iv,) in _perm_products(nv, 1):
        for invs in _perm_products(nu, nv):
            def act(arrays, table, iv=iv, invs=invs):
                t = np.stack([table[inv, iv[v], :] for v, inv in enumerate(invs)], axis=1)
                if arrays is None:
                    return None, t
                p_vx1, pu = arrays
                pu = np.stack([pu[iv[v]][:, inv] for v, inv in enumerate(invs)])
                return [p_vx1[iv], pu], t
            out.append(act)
    return out


def _domain(kind: BoundKind, ch: NoncausalRelayChannel, cfg: SearchConfig) -> _Domain:
    X1, X2, Y2, _ = ch.sizes
    U, V, Yh = cfg.card_u, cfg.card_v, cfg.card_yhat
    K = BoundKind
    if kind is K.DF:
        return _Domain(kind, [((X1, X2), 2)])
    if kind is K.PDF:
        return _Domain(kind, [((V, X1, X2), 3)])
    if kind is K.CUTSET:
        return _Domain(kind, [((X1,), 1), ((X1, Y2, X2), 1)])
    if kind in (K.GP_DF, K.NUB):
        return _Domain(kind, [((X1,), 1), ((X1, Y2, U), 1)], (U, X1, Y2), X2, _gp_df_group(U, X1))
    if kind is K.GP_CF:
        return _Domain(kind, [((X1,), 1), ((Y2, U), 1)], (U, Y2), X2, _gp_cf_group(U))
    if kind is K.GP_CF_BINNED:
        return _Domain(kind, [((X1,), 1), ((Y2, U), 1), ((Y2, Yh), 1)], (U, Yh, Y2), X2,
                       _binned_group(U, Yh))
    if kind is K.CF:
        return _Domain(kind, [((X1,), 1), ((X2,), 1), ((Y2, Yh), 1)])
    if kind is K.GP_PDF_CF:
        return _Domain(kind, [((V, X1), 2), ((V, Y2, U), 1)], (U, V, Y2), X2, _gp_pdf_cf_group(U, V))
    raise ConfigError(f"no search domain for {kind}")


def _make_witness(kind: BoundKind, ch: NoncausalRelayChannel, arrays, table):
    K = BoundKind
    if kind is K.DF:
        return WitnessDF(JointPmf((ch.x1, ch.x2), arrays[0]))
    if kind is K.PDF:
        v = Alphabet("v", arrays[0].shape[0])
        return WitnessPDF(JointPmf((v, ch.x1, ch.x2), arrays[0]))
    if kind is K.CUTSET:
        return WitnessCutset(Pmf(ch.x1, arrays[0]), CondPmf((ch.x1, ch.y2), ch.x2, arrays[1]))
    if kind in (K.GP_DF, K.NUB):
        u = Alphabet("u", arrays[1].shape[-1])
        return WitnessGPDF(Pmf(ch.x1, arrays[0]), CondPmf((ch.x1, ch.y2), u, arrays[1]),
                           DeterministicMap((u, ch.x1, ch.y2), ch.x2, table))
    if kind is K.GP_CF:
        u = Alphabet("u", arrays[1].shape[-1])
        return WitnessGPCF(Pmf(ch.x1, arrays[0]), CondPmf((ch.y2,), u, arrays[1]),
                           DeterministicMap((u, ch.y2), ch.x2, table))
    if kind is K.GP_CF_BINNED:
        u = Alphabet("u", arrays[1].shape[-1])
        yh = Alphabet("yhat", arrays[2].shape[-1])
        return WitnessGPCFBinned(Pmf(ch.x1, arrays[0]), CondPmf((ch.y2,), u, arrays[1]),
                                 CondPmf((ch.y2,), yh, arrays[2]),
                                 DeterministicMap((u, yh, ch.y2), ch.x2, table))
    if kind is K.CF:
        yh = Alphabet("yhat", arrays[2].shape[-1])
        return WitnessCF(Pmf(ch.x1, arrays[0]), Pmf(ch.x2, arrays[1]), CondPmf((ch.y2,), yh, arrays[2]))
    if kind is K.GP_PDF_CF:
        v = Alphabet("v", arrays[0].shape[0])
        u = Alphabet("u", arrays[1].shape[-1])
        return WitnessGPPDFCF(JointPmf((v, ch.x1), arrays[0]), CondPmf((v, ch.y2), u, arrays[1]),
                              DeterministicMap((u, v, ch.y2), ch.x2, table))
    raise ConfigError(f"cannot build a witness for {kind}")


# --- grid phase ----------------------------------------------------------------

def _grid(dom: _Domain, cfg: SearchConfig, rng: np.random.Generator, cap: int | None = None) -> np.ndarray:
    """Product of per-row simplex grids, coarsened block by block to fit the point cap."""
    cap = cfg.grid_point_cap if cap is None else cap
    ks = [cfg.grid_resolution] * len(dom.blocks)

    def factor(b):
        r, d = dom.rows[b]
        return _grid_count(d, ks[b]) ** r

    while math.prod(factor(b) for b in range(len(ks))) > cap:
        open_ = [b for b in range(len(ks)) if ks[b] > 1]
        if not open_:
            break
        b = max(open_, key=lambda b: (factor(b), -b))
        ks[b] //= 2
    slots = []  # (column offset, row grid)
    for b, (o, (r, d)) in enumerate(zip(dom.offsets, dom.rows)):
        g = simplex_grid(d, ks[b])
        slots += [(o + i * d, g) for i in range(r)]
    total = math.prod(len(g) for _, g in slots)
    if total <= cap:
        n = total
        digits, rem = [], np.arange(total)
        for _, g in reversed(slots):
            digits.append(rem % len(g))
            rem = rem // len(g)
        digits = digits[::-1]
    else:
        n = cap
        digits = [rng.integers(0, len(g), size=n) for _, g in slots]
    P = np.empty((n, dom.size))
    for (o, g), dig in zip(slots, digits):
        P[:, o:o + g.shape[1]] = g[dig]
    return np.vstack([P, dom.uniform()[None]])


def _objective(dom: _Domain, ch, P: np.ndarray, tables: np.ndarray | None) -> np.ndarray:
    arrays = dom.split(P)
    if tables is not None:
        arrays.append(tables.reshape((len(P),) + dom.map_shape))
    return evaluate_batch(dom.kind, ch, *arrays).min(axis=1)


def _grid_scores(dom, ch, grid, maps) -> tuple[np.ndarray, np.ndarray]:
    """Best grid value and its grid index for every map (maps=None: a single pass)."""
    G = len(grid)
    if maps is None:
        vals = np.concatenate([_objective(dom, ch, grid[i:i + _CHUNK_ROWS], None)
                               for i in range(0, G, _CHUNK_ROWS)])
        return vals, np.arange(G)
    per = max(1, _CHUNK_ROWS // G)
    best_v = np.empty(len(maps))
    best_i = np.empty(len(maps), dtype=int)
    for s in range(0, len(maps), per):
        m = maps[s:s + per]
        if G > _CHUNK_ROWS:
            for j, t in enumerate(m):
                v = np.concatenate([_objective(dom, ch, grid[i:i + _CHUNK_ROWS],
                                               np.repeat(t[None], len(grid[i:i + _CHUNK_ROWS]), 0))
                                    for i in range(0, G, _CHUNK_ROWS)])
                best_i[s + j] = v.argmax()
                best_v[s + j] = v[best_i[s + j]]
            continue
        P = np.tile(grid, (len(m), 1))
        T = np.repeat(m, G, axis=0)
        v = _objective(dom, ch, P, T).reshape(len(m), G)
        best_i[s:s + len(m)] = v.argmax(axis=1)
        best_v[s:s + len(m)] = v.max(axis=1)
    return best_v, best_i


def _flip_climb(dom, ch, grid, table, value, perms, max_rounds=50):
    """Greedy single-entry changes to a sampled map, scored by its grid optimum."""
    evals = 0
    for _ in range(max_rounds):
        flips = []
        for pos in range(len(table)):
            for c in range(dom.codomain):
                if c != table[pos]:
                    t = table.copy()
                    t[pos] = c
                    flips.append(t)
        flips = np.array(flips)
        flips, _ = _lex_min_rows([flips[:, p] for p in perms])
        vals, _ = _grid_scores(dom, ch, grid, flips)
        evals += len(flips) * len(grid)
        j = int(vals.argmax())
        if vals[j] <= value + _TIE:
            break
        table, value = flips[j], vals[j]
    return table, evals


# --- refinement ----------------------------------------------------------------

class _Moves:
    """Coordinate-pair transfers (singly and in pairs) plus random zero-sum directions."""

    def __init__(self, dom: _Domain, cfg: SearchConfig):
        self.dom = dom
        self.n_random = cfg.random_directions
        src, dst, row = [], [], []
        rid = 0
        for o, (r, d) in zip(dom.offsets, dom.rows):
            for i in range(r):
                for a, b in itertools.permutations(range(d), 2):
                    dst.append(o + i * d + a)
                    src.append(o + i * d + b)
                    row.append(rid)
                rid += 1
        self.src, self.dst, self.row = np.array(src, int), np.array(dst, int), np.array(row, int)
        n = len(src)
        pairs = [(a, b) for a, b in itertools.combinations(range(n), 2)
                 if not (src[a] == dst[b] and dst[a] == src[b])]
        self.pairs = np.array(pairs, int).reshape(-1, 2) if n <= 48 else np.zeros((0, 2), int)

    def __call__(self, p: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
        n, D = len(self.src), len(p)
        delta = np.minimum(step, p[self.src])
        single = np.zeros((n, D))
        k = np.arange(n)
        single[k, self.dst] += delta
        single[k, self.src] -= delta
        cands = [p + single[delta > 0]]
        if len(self.pairs):
            ok = (delta[self.pairs[:, 0]] > 0) & (delta[self.pairs[:, 1]] > 0)
            pr = self.pairs[ok]
            cands.append(p + single[pr[:, 0]] + single[pr[:, 1]])
        if self.n_random:
            z = rng.standard_normal((self.n_random, D))
            for o, (r, d) in zip(self.dom.offsets, self.dom.rows):
                blk = z[:, o:o + r * d].reshape(-1, r, d)
                z[:, o:o + r * d] = (blk - blk.mean(axis=-1, keepdims=True)).reshape(-1, r * d)
            scale = np.abs(z).max(axis=1, keepdims=True)
            cands.append(p + step * z / np.where(scale > 0, scale, 1.0))
        return self.dom.normalize(np.vstack(cands))


def _refine(dom, ch, p, table, cfg, moves: _Moves, rng):
    tables = None if table is None else table[None]
    val = float(_objective(dom, ch, p[None], tables)[0])
    evals, step, converged = 1, cfg.refine_initial_step, False
    for _ in range(cfg.refine_iterations):
        C = moves(p, step, rng)
        T = None if table is None else np.repeat(table[None], len(C), 0)
        v = _objective(dom, ch, C, T)
        evals += len(C)
        j = int(v.argmax())
        if v[j] > val + _ACCEPT:
            p, val = C[j], float(v[j])
        else:
            step /= 2
            if step < cfg.tolerance:
                converged = True
                break
    return p, val, evals, converged


def _polish(dom, ch, p, table, val):
    """Maximize t subject to every term >= t, starting from the pattern-search point.

    Pattern moves stall on ridges where two terms are equal; the epigraph
    form follows the ridge. Jacobians are forward differences, one batch each.
    """
    D, h = len(p), 1e-8
    A = np.zeros((sum(r for r, _ in dom.rows), D + 1))
    i = 0
    for o, (r, d) in zip(dom.offsets, dom.rows):
        for j in range(r):
            A[i, o + j * d:o + (j + 1) * d] = 1.0
            i += 1
    memo = {}
    count = [0]

    def fj(x):
        key = x.tobytes()
        if key not in memo:
            P = np.vstack([x[:D], x[:D] + h * np.eye(D)])
            T = None if table is None else np.repeat(table[None], len(P), 0)
            arrays = dom.split(P)
            if T is not None:
                arrays.append(T.reshape((len(P),) + dom.map_shape))
            F = evaluate_batch(dom.kind, ch, *arrays)
            count[0] += len(P)
            memo.clear()
            memo[key] = (F[0], (F[1:] - F[0]).T / h)
        return memo[key]

    e_t = np.zeros(D + 1)
    e_t[-1] = -1.0
    cons = [dict(type="ineq", fun=lambda x: fj(x)[0] - x[-1],
                 jac=lambda x: np.hstack([fj(x)[1], -np.ones((len(fj(x)[0]), 1))])),
            dict(type="eq", fun=lambda x: A @ x - 1.0, jac=lambda x: A)]
    try:
        res = minimize(lambda x: -x[-1], np.append(p, val), jac=lambda x: e_t, method="SLSQP",
                       bounds=[(0.0, 1.0)] * D + [(None, None)], constraints=cons,
                       options=dict(maxiter=200, ftol=1e-15))
        q = dom.normalize(res.x[:D][None])[0]
    except (ValueError, ArithmeticError):
        return p, val, count[0]
    T = None if table is None else table[None]
    v = float(_objective(dom, ch, q[None], T)[0])
    count[0] += 1
    return (q, v, count[0]) if v > val else (p, val, count[0])


# --- driver --------------------------------------------------------------------

_CACHE: dict[tuple, BoundResult] = {}


def clear_cache():
    _CACHE.clear()


def _seed_from_witness(dom: _Domain, kind: BoundKind, w):
    arrays = witness_arrays(kind, w)
    if dom.map_shape is None:
        p = dom.flatten(arrays)
        return None if p is None else (p, None)
    p = dom.flatten(arrays[:-1])
    t = np.asarray(arrays[-1])
    if p is None or t.shape != dom.map_shape:
        return None
    return p, t.ravel().astype(np.int64)


def _cross_seeds(kind: BoundKind, ch: NoncausalRelayChannel, cfg: SearchConfig) -> list:
    """Witnesses of neighbouring bounds mapped into this bound's domain."""
    K = BoundKind
    X1, X2 = ch.x1.size, ch.x2.size
    out = []
    if kind is K.GP_DF:
        if cfg.card_u >= X2:
            out.append(emb.df_to_gp_df(ch, maximize(ch, K.DF, cfg).witness, cfg.card_u))
        out.append(emb.gp_cf_to_gp_df(ch, maximize(ch, K.GP_CF, cfg).witness))
    elif kind is K.NUB:
        out.append(maximize(ch, K.GP_DF, cfg).witness)
    elif kind is K.CUTSET:
        out.append(emb.df_to_cutset(ch, maximize(ch, K.DF, cfg).witness))
        out.append(emb.gp_df_to_cutset(ch, maximize(ch, K.NUB, cfg).witness))
    elif kind is K.GP_PDF_CF:
        out.append(emb.gp_cf_to_gp_pdf_cf(ch, maximize(ch, K.GP_CF, cfg).witness, cfg.card_v))
    elif kind is K.GP_CF_BINNED:
        if cfg.card_yhat == cfg.card_u:
            out.append(emb.gp_cf_to_binned(ch, maximize(ch, K.GP_CF, cfg).witness, cfg.card_u))
        if cfg.card_u >= X2:
            out.append(emb.cf_to_binned(ch, maximize(ch, K.CF, cfg).witness, cfg.card_u))
    elif kind is K.PDF:
        if cfg.card_v >= X1:
            out.append(emb.df_to_pdf(ch, maximize(ch, K.DF, cfg).witness, cfg.card_v))
    return out


def _center(dom: _Domain, ch, arrays, table, val, steps: int = 32):
    """Mix auxiliary conditionals toward uniform as far as the value allows (loss <= 1e-12).

    Optima are often flat in the auxiliary law; this picks the least committal
    representative deterministically.
    """
    aux = list(range(1, len(arrays))) if dom.map_shape is not None else (
        [2] if dom.kind is BoundKind.CF else [])
    if not aux:
        return arrays, 0
    lam = np.linspace(0.0, 1.0, steps + 1)
    B = len(lam)
    mixed = []
    for b, a in enumerate(arrays):
        a = np.broadcast_to(a, (B,) + a.shape)
        if b in aux:
            u = np.full(a.shape[1:], 1.0 / a.shape[-1])
            a = (1 - lam).reshape((B,) + (1,) * (a.ndim - 1)) * a + lam.reshape((B,) + (1,) * (a.ndim - 1)) * u
        mixed.append(a.reshape(B, -1))
    P = dom.normalize(np.hstack(mixed))
    T = None if table is None else np.repeat(np.ravel(table)[None], B, 0)
    vals = _objective(dom, ch, P, T)
    ok = np.nonzero(vals >= max(val, vals[0]) - 1e-12)[0]
    if len(ok) == 0:
        return arrays, B
    return [a[0] for a in dom.split(P[ok[-1]][None])], B


def _canonical(dom: _Domain, arrays, table):
    if not dom.group:
        return arrays, table
    shaped = table.reshape(dom.map_shape)
    images = [g(None, shaped)[1].ravel() for g in dom.group]
    _, arg = _lex_min_rows([im[None] for im in images])
    return dom.group[int(arg[0])](arrays, shaped)


def _search(kind: BoundKind, ch: NoncausalRelayChannel, cfg: SearchConfig, seeds) -> BoundResult:
    dom = _domain(kind, ch, cfg)
    rng = np.random.default_rng([cfg.seed, list(BoundKind).index(kind)])
    grid = _grid(dom, cfg, rng)
    evals = 0

    starts: list[tuple[np.ndarray, np.ndarray | None]] = []
    if dom.map_shape is None:
        vals, _ = _grid_scores(dom, ch, grid, None)
        evals += len(grid)
        order = np.lexsort((np.arange(len(vals)), -np.round(vals, 12)))
        starts += [(grid[i], None) for i in order[:cfg.refine_top]]
    else:
        perms = dom.map_perms()
        maps, sampled = _map_tables(dom.map_shape, dom.codomain, cfg.map_enumeration_cap, rng, perms)
        if len(maps) > cfg.screen_keep:
            coarse = _grid(dom, cfg, rng, cfg.screen_grid_cap)
            cv, _ = _grid_scores(dom, ch, coarse, maps)
            evals += len(maps) * len(coarse)
            keep = np.lexsort((np.arange(len(cv)), -np.round(cv, 12)))[:cfg.screen_keep]
            maps = maps[np.sort(keep)]
        vals, idx = _grid_scores(dom, ch, grid, maps)
        evals += len(maps) * len(grid)
        order = np.lexsort((np.arange(len(vals)), -np.round(vals, 12)))[:cfg.refine_top]
        tops = [(maps[i], vals[i], grid[idx[i]]) for i in order]
        if sampled:
            climbed = []
            for t, v, _ in tops:
                t2, e = _flip_climb(dom, ch, grid, t, v, perms)
                evals += e
                climbed.append(t2)
            climbed = np.unique(np.array(climbed), axis=0)
            cv, ci = _grid_scores(dom, ch, grid, climbed)
            tops += [(climbed[j], cv[j], grid[ci[j]]) for j in range(len(climbed))]
        starts += [(p, t) for t, _, p in tops]
    for w in seeds:
        s = _seed_from_witness(dom, kind, w)
        if s is not None:
            starts.append(s)

    moves = _Moves(dom, cfg)
    done = []
    for n, (p, t) in enumerate(starts):
        r = np.random.default_rng([cfg.seed, list(BoundKind).index(kind), n])
        p2, v, e, conv = _refine(dom, ch, p, t, cfg, moves, r)
        evals += e
        if cfg.polish and cfg.refine_iterations > 0:
            p2, v, e = _polish(dom, ch, p2, t, v)
            evals += e
        arrays = [a[0] for a in dom.split(dom.normalize(p2[None]))]
        table = None
        if t is not None:
            arrays, table = _canonical(dom, arrays, t)
        done.append((v, arrays, table, conv))

    # near-ties: the map reading the fewest inputs, then the smallest serialization
    top = max(d[0] for d in done)

    def key(d):
        if d[2] is None:
            used, tab = 0, ()
        else:
            used = sum(np.ptp(d[2], axis=a).any() for a in range(d[2].ndim))
            tab = tuple(np.ravel(d[2]))
        return used, tab, tuple(np.round(np.concatenate([a.ravel() for a in d[1]]), 9))
    v, arrays, table, conv = min((d for d in done if d[0] >= top - _TIE), key=key)
    if cfg.refine_iterations > 0:
        arrays, e = _center(dom, ch, arrays, table, v)
        evals += e
    w = _make_witness(kind, ch, arrays, table)
    ov = evaluate(kind, ch, w)
    return BoundResult(kind, ov.value, w, ov, evals, conv)


def maximize(ch: NoncausalRelayChannel, kind: BoundKind | str, cfg: SearchConfig | None = None,
             seeds: Sequence = (), use_cache: bool = True) -> BoundResult:
    """Maximize one bound over its witness domain (results memoized per channel and config)."""
    cfg = cfg or SearchConfig()
    if isinstance(kind, str):
        kind = BoundKind.parse(kind)
    key = (ch.fingerprint(), kind, cfg)
    if use_cache and not seeds and key in _CACHE:
        return _CACHE[key]
    if kind is BoundKind.DEGRADED_CAPACITY:
        if not is_degraded(ch):
            raise NotDegradedError("channel is not degraded: p(y3|x1,x2,y2) depends on x1")
        r = maximize(ch, BoundKind.GP_DF, cfg, seeds, use_cache)
        res = BoundResult(kind, r.value, r.witness, r.terms, r.evaluations, r.converged)
    else:
        res = _search(kind, ch, cfg, list(seeds) + _cross_seeds(kind, ch, cfg))
    if use_cache and not seeds:
        _CACHE[key] = res
    return res


ALL_KINDS = (BoundKind.DF, BoundKind.PDF, BoundKind.CF, BoundKind.GP_CF, BoundKind.GP_CF_BINNED,
             BoundKind.GP_DF, BoundKind.GP_PDF_CF, BoundKind.NUB, BoundKind.CUTSET)


def maximize_all(ch: NoncausalRelayChannel, cfg: SearchConfig | None = None,
                 kinds: Sequence[BoundKind] | None = None) -> dict[BoundKind, BoundResult]:
    kinds = list(kinds) if kinds is not None else list(ALL_KINDS)
    if kinds == list(ALL_KINDS) and is_degraded(ch):
        kinds.append(BoundKind.DEGRADED_CAPACITY)
    return {k: maximize(ch, k, cfg) for k in kinds}


__all__ = ["SearchConfig", "BoundResult", "ConfigError", "NotDegradedError", "simplex_grid",
           "enumerate_maps", "maximize", "maximize_all", "clear_cache", "ALL_KINDS", "TERM_NAMES"]
