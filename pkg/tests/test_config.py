import pytest

from skewec import config
from skewec.errors import ParameterError
from skewec.modulation import AlphaAbs, Constant, CosineInverted, Linear, Rational, SymmetricCdf
from skewec.elliptical import StudentT


def test_bundled_sets():
    assert [p.name for p in config.demo_sets()] == [f"demo_{c}" for c in "abcdef"]
    assert {p.name for p in config.closed_form_sets()} == {"cf_constant", "cf_linear", "cf_cosine", "cf_alpha_abs"}


def test_demo_a_fields():
    ps = config.demo("demo_a")
    assert (ps.rho, ps.a1, ps.a2, ps.b1, ps.b2) == (0.5, 1.0, 0.5, 0.0, 1.0)
    s = ps.to_density()
    assert s.g0 is SymmetricCdf.STANDARD_CAUCHY and isinstance(s.h, Rational)


def test_h_kinds():
    kinds = {p.name: type(p.to_density().h) for p in config.closed_form_sets()}
    assert kinds == {"cf_constant": Constant, "cf_linear": Linear, "cf_cosine": CosineInverted,
                     "cf_alpha_abs": AlphaAbs}


def test_round_trip():
    for ps in config.demo_sets():
        assert config.parse_text(ps.to_text()) == [ps]


def test_sectionless_file(tmp_path):
    f = tmp_path / "mine.ini"
    f.write_text("rho = 0.2\ngenerator = student_t\ndof = 4\n")
    (ps,) = config.load(f)
    assert ps.name == "mine"
    assert isinstance(ps.to_density().baseline.generator, StudentT)


def test_section_selection(tmp_path):
    f = tmp_path / "two.ini"
    f.write_text("[one]\nrho = 0.1\n[two]\nrho = 0.2\n")
    assert [p.rho for p in config.load(f, "two")] == [0.2]
    with pytest.raises(ParameterError, match="three"):
        config.load(f, "three")


@pytest.mark.parametrize("text,fragment", [
    ("rho = 1.0", "rho"),
    ("rho = 0.1\nb1 = 3\nb2 = 1", "b1"),
    ("rho = 0.1\nc2 = -1", "c2"),
    ("rho = 0.1\nbogus = 1", "unknown"),
    ("rho = abc", "number"),
    ("rho = nan", "finite"),
    ("generator = student_t", "dof"),
    ("generator = student_t\ndof = 0", "dof"),
    ("g0 = gumbel", "g0"),
    ("h_kind = spline", "h_kind"),
    ("standardized = maybe", "standardized"),
])
def test_invalid_files(text, fragment):
    with pytest.raises(ParameterError, match=fragment):
        config.parse_text(text)
