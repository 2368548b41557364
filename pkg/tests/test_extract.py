import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcot.llm import ExtractionError, ImplausibleValue, NoNumericValue, extract_numeric_prediction


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Reasoning...\nPREDICTION: -3.42", -3.42),
        ("solubility is roughly 0.5 in log units", 0.5),
        ("prediction: +1.25e0", 1.25),
        ("PREDICTION: **-1.5**", -1.5),
        ("logS ≈ −2.1 (log10 units)", -2.1),
        ("The value is -3.42.", -3.42),
        ("<think>maybe -9.0, or -8.0</think>\nPREDICTION: -2.0", -2.0),
        ("<think>I think -2.75 fits best", -2.75),
        ("PREDICTION: -4.0\nor maybe PREDICTION: -1.0", -4.0),
        ("For C6H6 at 25 C the value is -1.64", -1.64),
    ],
)
def test_extraction(text, expected):
    assert extract_numeric_prediction(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["I cannot determine this.", "", "log10 of C6H6"])
def test_no_number(text):
    with pytest.raises(NoNumericValue):
        extract_numeric_prediction(text)


@pytest.mark.parametrize("text", ["PREDICTION: 1200", "PREDICTION: -16", "PREDICTION: 1e999"])
def test_implausible(text):
    with pytest.raises(ImplausibleValue):
        extract_numeric_prediction(text)


@given(st.text())
def test_never_panics_on_arbitrary_text(text):
    try:
        value = extract_numeric_prediction(text)
    except ExtractionError:
        return
    assert -15.0 <= value <= 5.0
