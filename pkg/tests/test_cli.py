import csv
import io

import numpy as np
import pytest

from ncrelay import (BoundKind, ChannelFileError, evaluate, example_bec_channel, example_bsc_channel,
                     maximize, parse_channel_file, random_channel, read_witness, serialize_channel,
                     write_witness)
from ncrelay.bounds import witness_arrays
from ncrelay.cli import main
from ncrelay.fileio import REPORT_HEADER, SIM_HEADER, bundled_channel_path, report_csv
from ncrelay.optimizer import BoundResult

import helpers

GOOD = """# tiny channel
alphabet x1 2
alphabet x2 2
alphabet y2 2
alphabet y3 2
relay_channel
0.9 0.1
0.1 0.9
direct_channel
1 0
0 1
1 0
0 1
0.5 0.5
0.5 0.5
0.5 0.5
0.5 0.5
"""


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


# --- channel files -------------------------------------------------------------------

def test_bundled_files_parse_to_the_examples():
    bec = parse_channel_file(bundled_channel_path("bec_example.chan").read_text())
    assert np.array_equal(bec.w2, example_bec_channel().w2)
    assert np.array_equal(bec.w3, example_bec_channel().w3)
    assert bec == example_bec_channel()
    bsc = parse_channel_file(bundled_channel_path("bsc_example.chan").read_text())
    assert bsc == example_bsc_channel(0.2, 0.1, 0.55)


def test_parse_small_file():
    ch = parse_channel_file(GOOD)
    assert ch.sizes == (2, 2, 2, 2)
    np.testing.assert_array_equal(ch.w3[0, 0, 1], [0.0, 1.0])
    np.testing.assert_array_equal(ch.w3[0, 1, 0], [1.0, 0.0])
    np.testing.assert_array_equal(ch.w3[1, 0, 1], [0.5, 0.5])


def test_short_decimals_are_renormalized():
    text = GOOD.replace("0.9 0.1\n0.1 0.9", "0.3333333333 0.6666666667\n0.1 0.9")
    ch = parse_channel_file(text)
    assert abs(ch.w2[0].sum() - 1.0) <= 1e-15


def test_bad_row_sum_names_line_and_sum():
    text = GOOD.replace("0.1 0.9\ndirect", "0.1 0.88\ndirect")
    with pytest.raises(ChannelFileError) as e:
        parse_channel_file(text)
    assert e.value.line == 8
    assert "line 8" in str(e.value) and "0.98" in str(e.value)


@pytest.mark.parametrize("mutate,msg", [
    (lambda t: t.replace("relay_channel", "relay_chanel"), "unknown directive"),
    (lambda t: t.replace("0.5 0.5\n", "", 1), "rows"),
    (lambda t: t + "relay_channel\n0.5 0.5\n0.5 0.5\n", "duplicate section"),
    (lambda t: t.replace("alphabet y3 2", "alphabet y3 2\nalphabet y3 2"), "duplicate alphabet"),
    (lambda t: t.replace("alphabet y3 2\n", ""), "missing alphabet"),
    (lambda t: t.replace("1 0\n0 1\n1 0", "1 0 0\n0 1\n1 0"), "entries"),
    (lambda t: t.replace("0.9 0.1", "0.9 x"), "not a number"),
    (lambda t: t.replace("0.9 0.1", "1.1 -0.1"), "nonnegative"),
])
def test_parse_errors(mutate, msg):
    with pytest.raises(ChannelFileError, match=msg):
        parse_channel_file(mutate(GOOD))


def test_serialize_round_trips_bit_exactly():
    rng = np.random.default_rng(0)
    for sizes in [(2, 2, 2, 2), (3, 2, 4, 2), (2, 3, 2, 3)]:
        ch = random_channel(rng, sizes)
        text = serialize_channel(ch)
        back = parse_channel_file(text)
        assert np.array_equal(back.w2, ch.w2) and np.array_equal(back.w3, ch.w3)
        assert serialize_channel(back) == text
    bec = example_bec_channel()
    assert parse_channel_file(serialize_channel(bec)) == bec


# --- witness files -------------------------------------------------------------------

FACTORIES = {
    BoundKind.DF: helpers.random_df, BoundKind.PDF: helpers.random_pdf,
    BoundKind.CUTSET: helpers.random_cutset, BoundKind.GP_DF: helpers.random_gp_df,
    BoundKind.NUB: helpers.random_gp_df, BoundKind.GP_CF: helpers.random_gp_cf,
    BoundKind.GP_CF_BINNED: helpers.random_binned, BoundKind.CF: helpers.random_cf,
    BoundKind.GP_PDF_CF: helpers.random_gp_pdf_cf,
}


@pytest.mark.parametrize("kind", list(FACTORIES), ids=lambda k: k.cli_name)
def test_witness_files_round_trip(kind):
    rng = np.random.default_rng(4)
    ch = example_bec_channel()
    w = FACTORIES[kind](rng, ch)
    value = evaluate(kind, ch, w).value
    text = write_witness(kind, ch, w, value)
    k2, w2, stored = read_witness(text, ch)
    assert k2 is kind and stored == value
    for a, b in zip(witness_arrays(kind, w), witness_arrays(kind, w2)):
        assert np.array_equal(a, b)
    assert abs(evaluate(kind, ch, w2).value - value) <= 1e-12


def test_witness_file_uses_channel_labels():
    ch = example_bec_channel()
    from ncrelay import example_bec_witness
    text = write_witness(BoundKind.GP_DF, ch, example_bec_witness(ch))
    assert "p_u_given_x1y2[x1=0,y2=e] = 0 1.0" in text
    assert "map[u=1,x1=0,y2=e] = 1" in text


def test_incomplete_witness_is_rejected():
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    text = write_witness(BoundKind.CUTSET, ch, helpers.random_cutset(np.random.default_rng(0), ch))
    broken = "\n".join(text.splitlines()[:-1])
    with pytest.raises(ValueError, match="incomplete"):
        read_witness(broken, ch)


# --- reports ------------------------------------------------------------------------

def test_report_floors_negative_values_and_flags_nub():
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    w = helpers.random_gp_df(np.random.default_rng(0), ch)
    ov = evaluate(BoundKind.NUB, ch, w)
    rows = _rows(report_csv("abc", [BoundResult(BoundKind.GP_DF, -0.25, w, ov, 1, True),
                                    BoundResult(BoundKind.NUB, 0.1234564, w, ov, 1, False)]))
    assert rows[0] == REPORT_HEADER
    assert rows[1][2] == "0.000000" and rows[1][6] == ""
    assert rows[2][2] == "0.123456" and rows[2][3] == "false" and rows[2][6] == "cardinality"
    assert rows[2][4] == "u=2"


# --- commands -------------------------------------------------------------------------

def test_bounds_command_bsc(capsys, tmp_path):
    assert main(["bounds", "--channel", "bsc_example.chan", "--kinds", "df,cutset,nub",
                 "--witness-dir", str(tmp_path)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == REPORT_HEADER
    got = {r[1]: float(r[2]) for r in rows[1:]}
    assert list(got) == ["df", "cutset", "nub"]
    for name, ref in (("df", 0.2203), ("cutset", 0.2566), ("nub", 0.2453)):
        assert abs(got[name] - ref) <= 1e-3
    ch = example_bsc_channel(0.2, 0.1, 0.55)
    for r in rows[1:]:
        kind, w, stored = read_witness(open(r[5]).read(), ch)
        assert abs(evaluate(kind, ch, w).value - stored) <= 1e-12


def test_bounds_command_bec(capsys, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bounds", "--channel", "bec_example.chan", "--kinds", "gp-df", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    rows = _rows(out.read_text())
    assert abs(float(rows[1][2]) - 0.5) <= 1e-3


def test_bounds_missing_file(capsys):
    assert main(["bounds", "--channel", "/nonexistent/x.chan"]) == 2
    cap = capsys.readouterr()
    assert cap.out == "" and "not found" in cap.err


def test_bounds_bad_file(capsys, tmp_path):
    p = tmp_path / "bad.chan"
    p.write_text(GOOD.replace("0.1 0.9\ndirect", "0.1 0.88\ndirect"))
    assert main(["bounds", "--channel", str(p)]) == 2
    assert "line 8" in capsys.readouterr().err


def test_bounds_config_error(capsys):
    assert main(["bounds", "--channel", "bsc_example.chan", "--grid", "0"]) == 3
    assert capsys.readouterr().out == ""


def test_bounds_random_channel_helper(capsys):
    assert main(["bounds", "--random-channel", "5", "--kinds", "df", "--grid", "4",
                 "--refine-iters", "20"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 2 and rows[1][1] == "df"


def test_simulate_zero_trials(capsys):
    assert main(["simulate", "--channel", "bec_example.chan", "--witness-from-bound",
                 "--n", "8", "--rate", "0.25", "--rtilde", "0.5", "--trials", "0"]) == 3


def test_simulate_cap_violation(capsys):
    assert main(["simulate", "--channel", "bec_example.chan", "--witness-from-bound",
                 "--n", "16", "--rate", "0.9", "--rtilde", "0.7", "--trials", "5"]) == 3


def test_simulate_is_byte_deterministic(capsys, tmp_path):
    ch = example_bec_channel()
    from ncrelay import example_bec_witness
    wp = tmp_path / "w.wit"
    wp.write_text(write_witness(BoundKind.GP_DF, ch, example_bec_witness(ch)))
    args = ["simulate", "--channel", "bec_example.chan", "--witness", str(wp), "--n", "8,12",
            "--rate", "0.25", "--rtilde", "0.5", "--trials", "50", "--seed", "7"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    rows = _rows(first)
    assert rows[0] == SIM_HEADER and [r[0] for r in rows[1:]] == ["8", "12"]


def test_simulate_rejects_non_gp_df_witness(capsys, tmp_path):
    ch = example_bec_channel()
    wp = tmp_path / "w.wit"
    wp.write_text(write_witness(BoundKind.DF, ch, helpers.random_df(np.random.default_rng(0), ch)))
    assert main(["simulate", "--channel", "bec_example.chan", "--witness", str(wp), "--n", "8",
                 "--rate", "0.25", "--rtilde", "0.5", "--trials", "5"]) == 2


def test_verify_examples(capsys):
    assert main(["verify-examples"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5 and all(line.startswith("PASS") for line in out)
    assert main(["verify-examples"]) == 0
    assert capsys.readouterr().out.splitlines() == out


def test_verify_examples_tight_tolerance(capsys):
    assert main(["verify-examples", "--tol", "1e-9"]) == 1
    out = capsys.readouterr().out.splitlines()
    assert sum(line.startswith("FAIL") for line in out) >= 4
