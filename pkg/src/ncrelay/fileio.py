"""Channel spec files, witness files and CSV reports.

Channel files are line oriented with `#` comments:

    alphabet x1 2
    alphabet y2 3 labels 0,1,e
    relay_channel          (|X1| rows of |Y2| numbers)
    direct_channel         (|X1|*|X2|*|Y2| rows of |Y3| numbers, (x1,x2,y2) lexicographic)

Floats are written with `repr`, which is the shortest decimal that reads
back to the same double, so serialize/parse round-trips bit-exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import re
from importlib import resources
from pathlib import Path

import numpy as np

from .bounds import BoundKind, witness_arrays
from .channel import NoncausalRelayChannel
from .prob import Alphabet, CondPmf

ROW_TOL = 1e-9
_ROUNDING = 8 * np.finfo(float).eps
CHANNEL_AXES = ("x1", "x2", "y2", "y3")


class ChannelFileError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class WitnessFileError(ValueError):
    pass


# --- channel files -------------------------------------------------------------

def _numbers(tokens, lineno) -> list[float]:
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise ChannelFileError(f"not a number in {' '.join(tokens)!r}", lineno) from None
    if any(not math.isfinite(v) or v < 0 for v in vals):
        raise ChannelFileError("probabilities must be finite and nonnegative", lineno)
    return vals


def parse_channel_file(text: str) -> NoncausalRelayChannel:
    alphabets: dict[str, Alphabet] = {}
    sections: dict[str, list[tuple[int, list[float]]]] = {}
    header_line: dict[str, int] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "alphabet":
            if current is not None:
                raise ChannelFileError("alphabet declared after a table section", lineno)
            if len(tok) not in (3, 5) or (len(tok) == 5 and tok[3] != "labels"):
                raise ChannelFileError("expected 'alphabet NAME SIZE [labels a,b,...]'", lineno)
            name = tok[1]
            if name not in CHANNEL_AXES:
                raise ChannelFileError(f"unknown alphabet {name!r}; expected one of {CHANNEL_AXES}", lineno)
            if name in alphabets:
                raise ChannelFileError(f"duplicate alphabet {name!r}", lineno)
            try:
                size = int(tok[2])
            except ValueError:
                raise ChannelFileError(f"bad alphabet size {tok[2]!r}", lineno) from None
            labels = tuple(tok[4].split(",")) if len(tok) == 5 else None
            try:
                alphabets[name] = Alphabet(name, size, labels)
            except ValueError as e:
                raise ChannelFileError(str(e), lineno) from None
        elif head in ("relay_channel", "direct_channel"):
            if len(tok) != 1:
                raise ChannelFileError(f"{head} takes no arguments", lineno)
            if head in sections:
                raise ChannelFileError(f"duplicate section {head!r}", lineno)
            sections[head] = []
            header_line[head] = lineno
            current = head
        elif head[0].isdigit() or head[0] in ".+-":
            if current is None:
                raise ChannelFileError("numbers outside a table section", lineno)
            sections[current].append((lineno, _numbers(tok, lineno)))
        else:
            raise ChannelFileError(f"unknown directive {head!r}", lineno)

    missing = [a for a in CHANNEL_AXES if a not in alphabets]
    if missing:
        raise ChannelFileError(f"missing alphabet declarations: {', '.join(missing)}")
    for s in ("relay_channel", "direct_channel"):
        if s not in sections:
            raise ChannelFileError(f"missing section {s!r}")
    x1, x2, y2, y3 = (alphabets[a] for a in CHANNEL_AXES)

    def table(name, n_rows, width):
        rows = sections[name]
        if len(rows) != n_rows:
            raise ChannelFileError(f"{name} needs {n_rows} rows, found {len(rows)}", header_line[name])
        out = np.empty((n_rows, width))
        for i, (lineno, vals) in enumerate(rows):
            if len(vals) != width:
                raise ChannelFileError(f"row has {len(vals)} entries, expected {width}", lineno)
            s = math.fsum(vals)
            if abs(s - 1.0) > ROW_TOL:
                raise ChannelFileError(f"row sums to {s!r}, not 1", lineno)
            # rows already stochastic to rounding are kept verbatim so files round-trip
            out[i] = np.array(vals) / (s if abs(s - 1.0) > _ROUNDING else 1.0)
        return out

    w2 = table("relay_channel", x1.size, y2.size)
    w3 = table("direct_channel", x1.size * x2.size * y2.size, y3.size)
    w3 = w3.reshape(x1.size, x2.size, y2.size, y3.size)
    return NoncausalRelayChannel(x1, x2, y2, y3, CondPmf((x1,), y2, w2),
                                 CondPmf((x1, x2, y2), y3, w3))


def _fmt(x: float) -> str:
    x = float(x)
    return "0" if x == 0 else repr(x)


def serialize_channel(ch: NoncausalRelayChannel) -> str:
    lines = []
    for a in (ch.x1, ch.x2, ch.y2, ch.y3):
        extra = f" labels {','.join(a.labels)}" if a.labels is not None else ""
        lines.append(f"alphabet {a.name} {a.size}{extra}")
    lines.append("relay_channel")
    lines += [" ".join(_fmt(v) for v in row) for row in ch.w2]
    lines.append("direct_channel")
    lines += [" ".join(_fmt(v) for v in row) for row in ch.w3.reshape(-1, ch.y3.size)]
    return "\n".join(lines) + "\n"


def bundled_channel_path(name: str) -> Path | None:
    p = resources.files("ncrelay") / "data" / name
    return Path(str(p)) if p.is_file() else None


def resolve_channel_path(arg: str) -> Path:
    """A path on disk, or else the name of a bundled example file."""
    p = Path(arg)
    if p.is_file():
        return p
    bundled = bundled_channel_path(p.name)
    if bundled is not None:
        return bundled
    raise FileNotFoundError(f"channel file not found: {arg}")


def load_channel(arg: str) -> tuple[NoncausalRelayChannel, str]:
    """Parsed channel plus a content hash of the file text."""
    text = resolve_channel_path(arg).read_text(encoding="utf-8")
    return parse_channel_file(text), content_id(text)


def content_id(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# --- witness files -------------------------------------------------------------
# Each component is (key, axis names); probability tables put the row axis last.

_LAYOUT = {
    BoundKind.DF: [("p_x1x2", ("x1", "x2"))],
    BoundKind.PDF: [("p_vx1x2", ("v", "x1", "x2"))],
    BoundKind.CUTSET: [("p_x1", ("x1",)), ("p_x2_given_x1y2", ("x1", "y2", "x2"))],
    BoundKind.GP_DF: [("p_x1", ("x1",)), ("p_u_given_x1y2", ("x1", "y2", "u")), ("map", ("u", "x1", "y2"))],
    BoundKind.GP_CF: [("p_x1", ("x1",)), ("p_u_given_y2", ("y2", "u")), ("map", ("u", "y2"))],
    BoundKind.GP_CF_BINNED: [("p_x1", ("x1",)), ("p_u_given_y2", ("y2", "u")),
                             ("p_yhat_given_y2", ("y2", "yhat")), ("map", ("u", "yhat", "y2"))],
    BoundKind.CF: [("p_x1", ("x1",)), ("p_x2", ("x2",)), ("p_yhat_given_y2", ("y2", "yhat"))],
    BoundKind.GP_PDF_CF: [("p_vx1", ("v", "x1")), ("p_u_given_vy2", ("v", "y2", "u")),
                          ("map", ("u", "v", "y2"))],
}
_LAYOUT[BoundKind.NUB] = _LAYOUT[BoundKind.GP_DF]
_LAYOUT[BoundKind.DEGRADED_CAPACITY] = _LAYOUT[BoundKind.GP_DF]
AUX = ("u", "v", "yhat")


def _axis_lookup(ch, aux_sizes: dict[str, int]) -> dict[str, Alphabet]:
    d = {"x1": ch.x1, "x2": ch.x2, "y2": ch.y2, "y3": ch.y3}
    d.update({k: Alphabet(k, v) for k, v in aux_sizes.items()})
    return d


def write_witness(kind: BoundKind, ch: NoncausalRelayChannel, w, value: float | None = None) -> str:
    arrays = witness_arrays(kind, w)
    layout = _LAYOUT[kind]
    aux = {}
    for (key, axes), arr in zip(layout, arrays):
        for name, size in zip(axes, np.shape(arr)):
            if name in AUX:
                aux[name] = size
    look = _axis_lookup(ch, aux)
    lines = [f"kind = {kind.value}"]
    if value is not None:
        lines.append(f"value = {_fmt(value)}")
    lines += [f"alphabet {k} {aux[k]}" for k in AUX if k in aux]
    for (key, axes), arr in zip(layout, arrays):
        arr = np.asarray(arr)
        if key == "map":
            for idx in np.ndindex(arr.shape):
                where = ",".join(f"{a}={look[a].label(i)}" for a, i in zip(axes, idx))
                lines.append(f"map[{where}] = {look['x2'].label(int(arr[idx]))}")
            continue
        lead = axes[:-1]
        if not lead:
            lines.append(f"{key} = " + " ".join(_fmt(v) for v in arr))
            continue
        for idx in np.ndindex(arr.shape[:-1]):
            where = ",".join(f"{a}={look[a].label(i)}" for a, i in zip(lead, idx))
            lines.append(f"{key}[{where}] = " + " ".join(_fmt(v) for v in arr[idx]))
    return "\n".join(lines) + "\n"


_ENTRY = re.compile(r"^(\w+(?:\[[^\]]*\])?)\s*=\s*(.*)$")


def _parse_index(text: str, axes, look) -> tuple[int, ...]:
    parts = dict(p.split("=", 1) for p in text.split(",")) if text else {}
    if sorted(parts) != sorted(axes):
        raise WitnessFileError(f"index [{text}] should name {axes}")
    return tuple(look[a].index(parts[a]) for a in axes)


def read_witness(text: str, ch: NoncausalRelayChannel):
    """Returns (kind, witness, stored value or None)."""
    from .optimizer import _make_witness
    kind, value, aux, entries = None, None, {}, []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet "):
            _, name, size = line.split()
            aux[name] = int(size)
            continue
        if "=" not in line:
            raise WitnessFileError(f"cannot read line {raw!r}")
        m = _ENTRY.match(line)
        if m is None:
            raise WitnessFileError(f"cannot read line {raw!r}")
        lhs, rhs = m.group(1), m.group(2).strip()
        if lhs == "kind":
            kind = BoundKind.parse(rhs)
        elif lhs == "value":
            value = float(rhs)
        else:
            entries.append((lhs, rhs))
    if kind is None:
        raise WitnessFileError("witness file has no kind")
    look = _axis_lookup(ch, aux)
    layout = _LAYOUT[kind]
    arrays = {key: np.full(tuple(look[a].size for a in axes), np.nan) for key, axes in layout}
    for lhs, rhs in entries:
        key, _, idx = lhs.rstrip("]").partition("[")
        if key not in arrays:
            raise WitnessFileError(f"unexpected entry {key!r} for {kind.value}")
        axes = dict(layout)[key]
        if key == "map":
            arrays[key][_parse_index(idx, axes, look)] = look["x2"].index(rhs)
        else:
            i = _parse_index(idx, axes[:-1], look)
            row = [float(t) for t in rhs.split()]
            if len(row) != look[axes[-1]].size:
                raise WitnessFileError(f"{lhs}: expected {look[axes[-1]].size} numbers")
            arrays[key][i] = row
    for key, arr in arrays.items():
        if np.isnan(arr).any():
            raise WitnessFileError(f"{key} is incomplete")
    ordered = [arrays[k] for k, _ in layout]
    base = BoundKind.GP_DF if kind in (BoundKind.NUB, BoundKind.DEGRADED_CAPACITY) else kind
    table = ordered.pop().astype(np.int64) if layout[-1][0] == "map" else None
    return kind, _make_witness(base, ch, ordered, table), value


# --- reports --------------------------------------------------------------------

REPORT_HEADER = ["channel", "bound", "value", "converged", "cardinalities", "witness", "caveat"]
_CARDS = {
    BoundKind.PDF: ("v",), BoundKind.GP_DF: ("u",), BoundKind.NUB: ("u",),
    BoundKind.DEGRADED_CAPACITY: ("u",), BoundKind.GP_CF: ("u",),
    BoundKind.GP_CF_BINNED: ("u", "yhat"), BoundKind.CF: ("yhat",), BoundKind.GP_PDF_CF: ("u", "v"),
}


def cardinalities(kind: BoundKind, w) -> str:
    out = []
    for name in _CARDS.get(kind, ()):
        a = getattr(w, f"{name}_alphabet")
        out.append(f"{name}={a.size}")
    return ";".join(out)


def report_csv(channel_id: str, results, witness_refs: dict | None = None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(REPORT_HEADER)
    for r in results:
        value = max(r.value, 0.0)  # negative GP-style optima are reported as rate 0
        wr.writerow([channel_id, r.kind.cli_name, f"{value:.6f}", str(bool(r.converged)).lower(),
                     cardinalities(r.kind, r.witness),
                     (witness_refs or {}).get(r.kind, ""),
                     "cardinality" if r.kind is BoundKind.NUB else ""])
    return buf.getvalue()


SIM_HEADER = ["n", "rate", "p_err", "ci", "relay_fail", "multicode_fail", "decode_fail"]


def simulation_csv(cells) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(SIM_HEADER)
    for c in cells:
        e = c.estimate
        wr.writerow([c.n, repr(float(c.rate)), f"{e.p_err:.6f}", f"{e.ci_halfwidth:.6f}",
                     e.relay_decode_failures, e.multicoding_failures, e.decoder_failures])
    return buf.getvalue()
