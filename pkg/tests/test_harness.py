import io
from fractions import Fraction

import pytest

from schursigma.cli import main
from schursigma.errors import ValidationError
from schursigma.harness.census import census, compare, round_half_up
from schursigma.harness.fielddata import (
    FieldRecord,
    format_field_data,
    load_census_data,
    parse_field_data,
    reconstruct_census,
)
from schursigma.ipad import parse_ipad

HEADER = "discriminant,classgroup,sub1,sub2,sub3,sub4,complete\n"

# reference proportions per interval and cumulative
REFERENCE = [
    ("[3,3];[3,3,3][3,9]^3", "0.2108 0.2187 0.1750 0.1784 0.1622 0.1871"),
    ("[3,9];[3,3,9]^2[3,27]^2", "0.1024 0.1252 0.1192 0.0878 0.1138 0.1097"),
    ("[3,3];[3,3,3]^3[3,9]", "0.1044 0.0713 0.1071 0.0892 0.0597 0.0853"),
    ("[3,3];[3,9]^3[9,27]", "0.1004 0.0792 0.0754 0.0734 0.0555 0.0752"),
    ("[3,3];[3,3,3]^2[3,9]^2", "0.0944 0.0729 0.0588 0.0878 0.0597 0.0737"),
    ("[3,3];[3,3,3][3,9]^2[9,27]", "0.1004 0.0681 0.0709 0.0576 0.0583 0.0693"),
    ("[3,3];[3,3,3]^2[9,27]^2", "0.0321 0.0238 0.0347 0.0245 0.0356 0.0301"),
    ("[3,3];[3,9]^4", "0.0361 0.0269 0.0271 0.0273 0.0199 0.0270"),
    ("[3,27];[3,3,27]^2[3,81]^2", "0.0201 0.0285 0.0302 0.0288 0.0228 0.0263"),
    ("[3,9];[3,3,9][3,9,27][3,27]^2", "0.0341 0.0254 0.0362 0.0115 0.0256 0.0260"),
    ("[3,9];[3,3,9][3,27]^3", "0.0402 0.0301 0.0226 0.0101 0.0128 0.0219"),
    ("[3,9];[3,3,9][9,9,9][3,27]^2", "0.0321 0.0174 0.0166 0.0144 0.0171 0.0188"),
    ("[3,9];[3,3,3,3][3,27]^3", "0.0100 0.0190 0.0196 0.0129 0.0213 0.0169"),
    ("[3,9];[3,9,27][3,27]^3", "0.0120 0.0206 0.0121 0.0173 0.0185 0.0163"),
    ("Other IPADs (49 types)", "0.0402 0.0967 0.0845 0.1036 0.1010 0.0878"),
    ("Incomplete IPADs", "0.0301 0.0761 0.1101 0.1755 0.2162 0.1285"),
]


@pytest.fixture(scope="module")
def bundled_census():
    return census(load_census_data())


def test_bundled_csv_is_the_reconstruction():
    assert load_census_data() == reconstruct_census()


def test_bundled_census_counts(bundled_census):
    assert bundled_census.total == 3190
    assert sum(bundled_census.interval_totals) == 3190
    assert bundled_census.rows[0].counts == [105, 138, 116, 124, 114]
    assert bundled_census.incomplete.total == 410
    assert bundled_census.other.types == 49


def test_full_proportion_table(bundled_census):
    got = [(r.label, " ".join(round_half_up(x) for x in bundled_census.proportions(r))) for r in bundled_census.all_rows()]
    assert got == REFERENCE


def test_class_group_marginals(bundled_census):
    props = list(bundled_census.class_group_proportions().items())[:4]
    assert [(cg, round_half_up(x)) for cg, x in props] == [
        ((3, 3), "0.6332"), ((3, 9), "0.2743"), ((3, 27), "0.0740"), ((3, 81), "0.0107")]


def test_first_named_field_is_present():
    recs = {r.discriminant: r for r in load_census_data()}
    assert str(recs[-4027].ipad) == "[3,3];[3,3,3][3,9]^3"


def test_parse_incomplete_and_round_trip():
    text = HEADER + "-4027,3-3,3-3-3,3-9,3-9,3-9,1\n-3299,3-9,3-3-9,?,3-27,3-27,0\n"
    recs = parse_field_data(text)
    assert recs[0].complete and str(recs[0].ipad) == "[3,3];[3,3,3][3,9]^3"
    assert not recs[1].complete and recs[1].subfield_groups[1] is None
    assert parse_field_data(format_field_data(recs)) == recs


def test_parse_empty_input():
    assert parse_field_data(io.StringIO("")) == []
    assert parse_field_data(HEADER) == []


@pytest.mark.parametrize("row, msg", [
    ("-4027,3-3,3-3-3,3-9,3-9,1", "expected 7 fields"),
    ("4027,3-3,3-3-3,3-9,3-9,3-9,1", "negative"),
    ("abc,3-3,3-3-3,3-9,3-9,3-9,1", "discriminant"),
    ("-4027,3,3-3-3,3-9,3-9,3-9,1", "rank"),
    ("-4027,3-3,3-3-3,3-x,3-9,3-9,1", "subfield"),
    ("-4027,3-3,3-3-3,?,3-9,3-9,1", "disagrees"),
    ("-4027,3-3,3-3-3,3-9,3-9,3-9,2", "0 or 1"),
])
def test_parse_errors_name_the_line(row, msg):
    with pytest.raises(ValidationError, match=f"line 3: .*{msg}"):
        parse_field_data(HEADER + "-4027,3-3,3-3-3,3-9,3-9,3-9,1\n" + row + "\n")


def test_bad_header():
    with pytest.raises(ValidationError, match="line 1"):
        parse_field_data("d,cg\n-4027,3-3\n")


def test_census_rejects_out_of_range_discriminant():
    rec = FieldRecord(-5, (3, 3), ((3, 3, 3), (3, 9), (3, 9), (3, 9)), True)
    with pytest.raises(ValidationError):
        census([rec], intervals=((10, 20),))


def test_round_half_up():
    assert round_half_up(Fraction(1, 8), 2) == "0.13"
    assert round_half_up(Fraction(5, 100000)) == "0.0001"
    assert round_half_up(Fraction(-1, 3)) == "-0.3333"


def test_compare_top_row(bundled_census):
    preds = {parse_ipad("[3,3];[3,3,3][3,9]^3"): Fraction(128, 729)}
    cmp = compare(bundled_census, preds)
    top = cmp.rows[0]
    assert (round_half_up(top.observed), round_half_up(top.predicted)) == ("0.1871", "0.1756")
    assert round_half_up(top.delta) == "0.0116"
    # rows without a prediction keep their observed values
    assert cmp.rows[1].predicted is None and cmp.rows[1].delta is None


def test_compare_appends_unseen_predictions(bundled_census):
    unseen = parse_ipad("[9,9];[3,9,9]^4")
    cmp = compare(bundled_census, {unseen: Fraction(1, 100)})
    row = cmp.row("[9,9];[3,9,9]^4")
    assert row.observed == 0 and row.predicted == Fraction(1, 100)


def test_compare_cohen_lenstra_columns(bundled_census):
    cmp = compare(bundled_census, {})
    assert [(cg, round_half_up(pred)) for cg, _, pred in cmp.class_groups] == [
        ((3, 3), "0.5926"), ((3, 9), "0.2634"), ((3, 27), "0.0878"), ((3, 81), "0.0293")]
    assert "Cohen-Lenstra" in cmp.to_text()


def test_compare_with_empty_census():
    empty = census([])
    cmp = compare(empty, {parse_ipad("[3,3];[3,9]^4"): Fraction(16, 729)})
    assert cmp.rows[0].observed is None


def test_cli_census_and_exit_codes(tmp_path, capsys):
    assert main(["census", "--proportions"]) == 0
    out = capsys.readouterr().out
    assert "0.2108\t0.2187\t0.1750\t0.1784\t0.1622\t0.1871" in out
    bad = tmp_path / "bad.csv"
    bad.write_text(HEADER + "oops\n")
    assert main(["census", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["census", str(tmp_path / "missing.csv")]) == 1
    assert main(["enumerate", "--c", "3", "--budget-tuples", "10"]) == 2


def test_cli_compare_with_predictions_file(tmp_path, capsys):
    pred = tmp_path / "pred.tsv"
    pred.write_text("# ipad\tresolved\n[3,3];[3,3,3][3,9]^3\t128/729\n")
    assert main(["compare", "--predictions", str(pred)]) == 0
    line = capsys.readouterr().out.splitlines()[1]
    assert line.endswith("0.1871\t0.1756\t0.0116")


def test_cli_free_quotient_and_ipad(tmp_path, capsys):
    assert main(["free-quotient", "--c", "3"]) == 0
    assert capsys.readouterr().out == "order 3^10 = 59049\n"
    assert main(["free-quotient", "--c", "2", "--presentation", "--out", str(tmp_path / "w2.txt")]) == 0
    assert main(["ipad", str(tmp_path / "w2.txt")]) == 0
    assert capsys.readouterr().out.startswith("[9,9];")
