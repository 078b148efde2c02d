"""Monte Carlo simulation of the GP-DF random-coding scheme at small blocklength.

Per trial: fresh codebook, uniform message, relay decodes the message from
y2^n, picks the first typical u^n in the subcodebook (multicoding), sends
x2 symbol by symbol through the relay map, and the receiver decodes by joint
typicality of (x1^n, u^n, y3^n).

Only subcodebooks that are actually inspected get generated. Their symbols
come from a keyed counter hash of (trial key, message, index, time), so a
subcodebook is the same whenever it is looked at (relay and decoder agree)
without materializing 2^{nR} * 2^{nR~} sequences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import NoncausalRelayChannel, WitnessGPDF, build_joint_gp_df
from .prob import JointPmf

MEMORY_CAP = 2 ** 26
_SLACK = 1e-9  # float slack in the typicality comparison
_CHUNK = 256   # decoder candidates per subcodebook batch


class SimError(ValueError):
    pass


def _bits(n: int, r: float) -> int:
    # ceil(nR) without float fuzz such as 20 * 0.1 = 2.0000000000000004
    return math.ceil(round(n * r, 9))


@dataclass(frozen=True)
class SimParams:
    n: int
    rate_r: float
    rate_rtilde: float
    eps_relay: float = 0.2
    eps_decoder: float = 0.3
    trials: int = 1000
    seed: int = 0
    memory_cap: int = MEMORY_CAP

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise SimError(f"blocklength must be a positive integer, got {self.n!r}")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise SimError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise SimError("seed must be a nonnegative integer")
        if not (self.rate_r >= 0 and self.rate_rtilde >= 0):
            raise SimError("rates must be nonnegative")
        if not 0 < self.eps_relay < self.eps_decoder:
            raise SimError("need 0 < eps_relay < eps_decoder")
        size = self.n_messages * self.n_sequences * self.n
        if size > self.memory_cap:
            raise SimError(f"codebook 2^{_bits(self.n, self.rate_r)} x 2^{_bits(self.n, self.rate_rtilde)}"
                           f" x {self.n} = {size} symbols exceeds cap {self.memory_cap}")

    @property
    def n_messages(self) -> int:
        return 2 ** _bits(self.n, self.rate_r)

    @property
    def n_sequences(self) -> int:
        return 2 ** _bits(self.n, self.rate_rtilde)

    def replace(self, **kw) -> "SimParams":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return SimParams(**d)


@dataclass(frozen=True)
class ErrorEstimate:
    p_err: float
    ci_halfwidth: float
    relay_decode_failures: int
    multicoding_failures: int
    decoder_failures: int
    errors: int
    trials: int

    @classmethod
    def from_counts(cls, errors, trials, relay, multi, dec) -> "ErrorEstimate":
        p = errors / trials
        return cls(p, 1.96 * math.sqrt(p * (1 - p) / trials), relay, multi, dec, errors, trials)


@dataclass(frozen=True)
class GPDFCodebook:
    """Materialized codebook; the simulator itself only builds the parts it reads."""
    x1_codewords: np.ndarray    # (2^nR, n)
    u_subcodebooks: np.ndarray  # (2^nR, 2^nR~, n)


# --- typicality ------------------------------------------------------------

def _typical_rows(codes: np.ndarray, probs: np.ndarray, eps: float) -> np.ndarray:
    """Robust typicality of each row of joint-symbol codes (R, n) against flat probs (K,)."""
    R, n = codes.shape
    K = len(probs)
    counts = np.bincount((codes + K * np.arange(R)[:, None]).ravel(), minlength=R * K).reshape(R, K)
    expected = n * probs
    return np.all(np.abs(counts - expected) <= eps * expected + _SLACK, axis=1)


def typical(seqs, joint: JointPmf, eps: float) -> bool:
    """|empirical frequency(a) - p(a)| <= eps p(a) for every symbol tuple a."""
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if len(seqs) != len(joint.axes):
        raise SimError(f"{len(seqs)} sequences for a joint over {len(joint.axes)} axes")
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise SimError(f"sequence lengths differ: {sorted(lengths)}")
    shape = joint.probs.shape
    for s, k in zip(seqs, shape):
        if s.size and (s.min() < 0 or s.max() >= k):
            raise SimError("symbol out of range for the joint's alphabet")
    if lengths == {0}:
        raise SimError("empty sequences")
    codes = np.ravel_multi_index(tuple(seqs), shape)
    return bool(_typical_rows(codes[None], joint.probs.ravel(), eps)[0])


# --- sampling ----------------------------------------------------------------

def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw; cdf has the symbol axis last and broadcasts against u."""
    return (cdf[..., :-1] <= u[..., None]).sum(axis=-1)


_M1, _M2, _M3 = np.uint64(0x9E3779B97F4A7C15), np.uint64(0xBF58476D1CE4E5B9), np.uint64(0x94D049BB133111EB)


def _hash_uniforms(key: np.uint64, idx: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over (key, counter); uniform doubles in [0, 1)."""
    with np.errstate(over="ignore"):
        z = idx.astype(np.uint64) * _M1 + key
        z = (z ^ (z >> np.uint64(30))) * _M2
        z = (z ^ (z >> np.uint64(27))) * _M3
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class _Scheme:
    """Channel and witness tables flattened for fast per-trial work."""

    def __init__(self, ch: NoncausalRelayChannel, w: WitnessGPDF):
        w.validate(ch)
        self.ch = ch
        X1, X2, Y2, Y3 = ch.sizes
        U = w.u_alphabet.size
        self.sizes = (X1, X2, Y2, Y3, U)
        p_x1 = w.p_x1.probs
        pu = w.p_u_given_x1y2.probs                       # (x1, y2, u)
        self.cdf_x1 = np.cumsum(p_x1)
        self.cdf_y2 = np.cumsum(ch.w2, axis=-1)           # (x1, y2)
        p_u_x1 = np.einsum("ij,iju->iu", ch.w2, pu)       # p(u|x1)
        self.cdf_u = np.cumsum(p_u_x1, axis=-1)
        self.cdf_y3 = np.cumsum(ch.w3, axis=-1)           # (x1, x2, y2, y3)
        self.map = w.relay_map.table                      # (u, x1, y2)
        # typicality targets
        self.p_relay = (p_x1[:, None] * ch.w2).ravel()                        # (x1, y2)
        self.p_multi = (p_x1[:, None, None] * ch.w2[..., None] * pu)          # (x1, y2, u)
        self.p_multi = self.p_multi.transpose(2, 0, 1).ravel()                 # (u, x1, y2)
        j = build_joint_gp_df(ch, w).probs                                     # (x1, y2, u, x2, y3)
        self.p_dec = j.sum(axis=(1, 3)).ravel()                                # (x1, u, y3)
        self.p_pre = j.sum(axis=(1, 2, 3)).ravel()                             # (x1, y3)

    def subcodebooks(self, key, ms: np.ndarray, x1rows: np.ndarray, L: int, n: int) -> np.ndarray:
        idx = ((ms[:, None, None] * L + np.arange(L)[None, :, None]) * n + np.arange(n)[None, None, :])
        u = _hash_uniforms(key, idx)
        return _draw(self.cdf_u[x1rows[:, None, :]], u)


def _trial(s: _Scheme, p: SimParams, t: int):
    X1, X2, Y2, Y3, U = s.sizes
    n, M, L = p.n, p.n_messages, p.n_sequences
    ss = np.random.SeedSequence(p.seed, spawn_key=(t,))
    rng = np.random.default_rng(ss)
    key = np.uint64(ss.generate_state(1, np.uint64)[0])
    relay_fail = multi_fail = dec_fail = 0

    X = _draw(s.cdf_x1, rng.random((M, n)))
    msg = int(rng.integers(M))
    x1 = X[msg]
    y2 = _draw(s.cdf_y2[x1], rng.random(n))

    # relay: unique typical message
    if M == 1:
        mt = 0
    else:
        ok = np.flatnonzero(_typical_rows(X * Y2 + y2[None], s.p_relay, p.eps_relay))
        if len(ok) == 1:
            mt = int(ok[0])
        else:
            relay_fail = 1
            mt = int(rng.integers(M))
    # multicoding: first typical l
    xr = X[mt]
    Ub = s.subcodebooks(key, np.array([mt]), xr[None], L, n)[0]
    ok = np.flatnonzero(_typical_rows((Ub * X1 + xr[None]) * Y2 + y2[None], s.p_multi, p.eps_relay))
    if len(ok):
        l = int(ok[0])
    else:
        multi_fail = 1
        l = int(rng.integers(L))
    x2 = s.map[Ub[l], xr, y2]
    y3 = _draw(s.cdf_y3[x1, x2, y2], rng.random(n))

    # decoder: unique message with some typical (x1, u, y3)
    if M == 1:
        mhat = 0
    else:
        # (x1, y3) typicality is implied by (x1, u, y3) typicality, so it prunes exactly
        cand = np.flatnonzero(_typical_rows(X * Y3 + y3[None], s.p_pre, p.eps_decoder))
        found = []
        for c in range(0, len(cand), _CHUNK):
            ms = cand[c:c + _CHUNK]
            Us = s.subcodebooks(key, ms, X[ms], L, n)                          # (S, L, n)
            codes = (Us * X1 + X[ms][:, None, :]) * Y3 + y3[None, None, :]
            hit = _typical_rows(codes.reshape(-1, n), s.p_dec, p.eps_decoder).reshape(len(ms), L)
            found += ms[hit.any(axis=1)].tolist()
            if len(found) > 1:
                break
        if len(found) == 1:
            mhat = found[0]
        else:
            dec_fail = 1
            mhat = -1
    return int(mhat != msg), relay_fail, multi_fail, dec_fail


def simulate_gp_df(ch: NoncausalRelayChannel, w: WitnessGPDF, p: SimParams) -> ErrorEstimate:
    s = _Scheme(ch, w)
    totals = np.zeros(4, dtype=np.int64)
    for t in range(p.trials):
        totals += _trial(s, p, t)
    err, relay, multi, dec = (int(v) for v in totals)
    return ErrorEstimate.from_counts(err, p.trials, relay, multi, dec)


def generate_codebook(ch: NoncausalRelayChannel, w: WitnessGPDF, p: SimParams, trial: int = 0) -> GPDFCodebook:
    """The full codebook a given trial uses (for inspection and tests)."""
    s = _Scheme(ch, w)
    ss = np.random.SeedSequence(p.seed, spawn_key=(trial,))
    rng = np.random.default_rng(ss)
    key = np.uint64(ss.generate_state(1, np.uint64)[0])
    X = _draw(s.cdf_x1, rng.random((p.n_messages, p.n)))
    U = s.subcodebooks(key, np.arange(p.n_messages), X, p.n_sequences, p.n)
    return GPDFCodebook(X, U)


# --- sweeps ------------------------------------------------------------------

def cell_seed(base_seed: int, n: int, r: float) -> int:
    """Seed for one (n, R) cell, derived from the base seed alone."""
    ss = np.random.SeedSequence([int(base_seed), int(n), int(round(r * 1e9))])
    return int(ss.generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class SweepCell:
    n: int
    rate: float
    seed: int
    estimate: ErrorEstimate


def sweep(ch: NoncausalRelayChannel, w: WitnessGPDF, base: SimParams,
          n_values, r_values) -> list[SweepCell]:
    """Row-major grid (n outer, rate inner) of independent simulations."""
    params = [base.replace(n=int(n), rate_r=float(r), seed=cell_seed(base.seed, n, r))
              for n in n_values for r in r_values]  # validates every cell before running any
    return [SweepCell(q.n, q.rate_r, q.seed, simulate_gp_df(ch, w, q)) for q in params]


def example_bec_witness(ch: NoncausalRelayChannel) -> WitnessGPDF:
    """Uniform X1; U = X2 = 1 when y2 is an erasure, else U = X2 ~ Bern(1/2); map x2 = u."""
    from .channel import DeterministicMap
    from .prob import Alphabet, CondPmf, Pmf
    u = Alphabet("u", 2)
    erasure = ch.y2.index("e")
    pu = np.full((ch.x1.size, ch.y2.size, 2), 0.5)
    pu[:, erasure] = (0.0, 1.0)
    table = np.broadcast_to(np.arange(2)[:, None, None], (2, ch.x1.size, ch.y2.size))
    return WitnessGPDF(Pmf.uniform(ch.x1), CondPmf((ch.x1, ch.y2), u, pu),
                       DeterministicMap((u, ch.x1, ch.y2), ch.x2, table))
