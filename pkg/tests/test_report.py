from __future__ import annotations

import numpy as np
import pytest

from qmetro import bounds as gb
from qmetro.errors import RldUndefined
from qmetro.logderiv import sld_analysis
from qmetro.report import ReportConfig, best_fbar, build_report, saturation_flags
from qmetro.scenarios import SIGMA1, SIGMA2
from qmetro.states import StateFamily, evaluate


class TestBuildReport:
    def test_default_bounds(self, qubit_state):
        st = qubit_state(0.0)
        report = build_report(st, ReportConfig(bounds=("cp", "tp", "fbar"), p_list=(1, 2)))
        vals = report.upper_values(1)
        assert vals["cp"] == pytest.approx(9 / 4, abs=1e-10)
        assert vals["tp"] == pytest.approx(11 / 4, abs=1e-10)
        assert vals["fbar"] == pytest.approx(5 / 2, abs=1e-10)
        tight = [e for e in report.at_p(1) if e.tightest]
        assert len(tight) == 1 and tight[0].name == "cp"
        report.validate()

    def test_tp_falls_back_to_monte_carlo(self, qutrit_state):
        st, _ = qutrit_state("qutrit:1,2")
        config = ReportConfig(bounds=("tp",), p_list=(200,), enum_cap=100, seed=3,
                              mc_samples=5000)
        with pytest.warns(UserWarning, match="Monte Carlo"):
            report = build_report(st, config)
        entry = report.entries[0]
        assert entry.meta["method"] == "monte_carlo"
        assert entry.value <= 2.0

    def test_lower_refs_and_variational(self, qubit_state):
        st = qubit_state(0.5)
        report = build_report(
            st,
            ReportConfig(
                bounds=("cp", "lower", "refs", "variational"),
                p_list=(1,),
                variational_iters=100,
            ),
        )
        names = {e.name for e in report.entries}
        assert {"cp", "gamma_inf_lower", "gamma_inf_upper", "gill_massar",
                "zhu_hayashi", "variational"} <= names
        var = [e for e in report.entries if e.name == "variational"][0]
        assert var.kind == "reference"
        assert var.value <= 2 * 3 + 1e-9  # canonical start is <= 2n, descent only helps
        report.validate()

    def test_rld_entries(self, qutrit_state):
        st, _ = qutrit_state("qutrit:1,2")
        report = build_report(st, ReportConfig(bounds=("rld", "rld_cp"), p_list=(1,)))
        vals = report.upper_values(1)
        assert vals["rld"] == pytest.approx(2.0, abs=1e-9)
        assert vals["rld_cp"] == pytest.approx(1.5, abs=1e-9)

    def test_rld_undefined_propagates(self):
        ket = np.array([1.0, 0.0])
        fam = StateFamily.linear(np.outer(ket, ket), [SIGMA1 / 2, SIGMA2 / 2])
        st = evaluate(fam, np.zeros(2))
        with pytest.raises(RldUndefined):
            build_report(st, ReportConfig(bounds=("rld",), p_list=(1,)))

    def test_pure_bound_entry(self):
        ket = np.array([1.0, 0.0])
        fam = StateFamily.linear(np.outer(ket, ket), [SIGMA1 / 2, SIGMA2 / 2])
        st = evaluate(fam, np.zeros(2))
        report = build_report(st, ReportConfig(bounds=("pure",), p_list=(1, 3)))
        vals = {(e.name, e.p): e.value for e in report.entries}
        # p-independent: same value replicated per p
        assert vals[("pure", 1)] == vals[("pure", 3)]

    def test_unknown_bound_rejected(self, qubit_state):
        with pytest.raises(ValueError):
            build_report(qubit_state(0.0), ReportConfig(bounds=("nope",), p_list=(1,)))


class TestFbarStrategy:
    def test_large_p_uses_auto_align(self, qubit_state):
        # d^p = 16 exceeds the exhaustive cap: the per-pair commutator
        # eigenbasis is used and still yields a valid single-choice matrix.
        st = qubit_state(0.0)
        _, fisher, tilde = sld_analysis(st)
        fb = best_fbar(st, tilde, fisher, 4)
        assert fb.meta["strategy"].startswith("auto_align")
        val = gb.fbar_bound(fb, fisher, 3)
        assert val <= 3.0 + 1e-12
        # at delta = 0 the aligned entry equals the C_p entry N_p = 3/2
        assert abs(fb.entries[0, 1]) == pytest.approx(1.5, abs=1e-9)


class TestSaturationFlags:
    def test_qubit(self, qubit_state):
        flags = saturation_flags(qubit_state(0.0), p=1)
        assert (flags.partial_commutative, flags.weak_commutative) == (False, True)
        flags = saturation_flags(qubit_state(0.5), p=1)
        assert (flags.partial_commutative, flags.weak_commutative) == (False, False)
