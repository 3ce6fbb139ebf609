"""
Content tabs: operator, scenarios, error analysis and circuit runs
"""
from pathlib import Path

import streamlit as st

from filter_circuit import (
    POLARIZATION_BASIS,
    CircuitError,
    ContractViolation,
    circuit_report,
    operator_report,
    parse_circuit,
)
from scenarios import SCENARIO_NAMES, error_analysis, run_scenario
from styling import create_icon_header

CIRCUIT_DIR = Path(__file__).parent / "circuits"


def _fmt(x):
    return f"{x:.6g}"


def _fmt_pair(pair):
    re, im = pair
    return f"{re:.6g} {'+' if im >= 0 else '-'} {abs(im):.6g}i"


def _detector_eta():
    """None selects ideal detectors"""
    return None if st.session_state.ideal_detectors else st.session_state.eta


def create_content_tabs():
    """Create and handle the main content tabs"""
    tab1, tab2, tab3, tab4 = st.tabs(["🧮 Operator", "🔀 Scenarios", "📉 Error analysis", "🔌 Circuit"])

    with tab1:
        _handle_operator_tab()

    with tab2:
        _handle_scenario_tab()

    with tab3:
        _handle_error_tab()

    with tab4:
        _handle_circuit_tab()


def _handle_operator_tab():
    st.markdown(create_icon_header("fas fa-th", "Effective polarization operator"), unsafe_allow_html=True)
    try:
        report = operator_report(st.session_state.attenuator_r, st.session_state.attenuator_mode)
    except ContractViolation as e:
        st.error(str(e))
        return

    rows = []
    for basis, row in zip(POLARIZATION_BASIS, report.entries):
        rows.append({"out \\ in": basis, **{b: _fmt_pair(z) for b, z in zip(POLARIZATION_BASIS, row)}})
    st.table(rows)

    col1, col2 = st.columns(2)
    col1.metric("Compensation phase (rad)", _fmt(report.compensation_phi))
    col2.metric("HH acceptance", _fmt(report.acceptance["HH"]))
    st.table([{"input": b, "acceptance": _fmt(p)} for b, p in report.acceptance.items()])


def _handle_scenario_tab():
    st.markdown(create_icon_header("fas fa-project-diagram", "Scenarios"), unsafe_allow_html=True)
    name = st.selectbox("Scenario", SCENARIO_NAMES, key="scenario_name")
    kwargs = {"eta": _detector_eta(), "dark": st.session_state.dark}

    if name in ("encode2", "encode3", "encode-n"):
        col1, col2 = st.columns(2)
        ch = col1.number_input("cH", value=0.6, key="scenario_ch")
        cv = col2.number_input("cV", value=0.8, key="scenario_cv")
        kwargs.update(ch=ch, cv=cv)
        if name == "encode-n":
            kwargs["photons"] = st.number_input("Photons", min_value=2, max_value=6, value=4, key="scenario_n")
    elif name == "max-entangled":
        col1, col2, col3 = st.columns(3)
        c1 = col1.number_input("c1", value=0.6, key="scenario_c1")
        c2 = col2.number_input("c2", value=0.8, key="scenario_c2")
        phi = col3.number_input("φ", value=0.0, key="scenario_phi")
        kwargs.update(c1=c1, c2=c2, phi=phi)
    if name != "entangle" and name != "max-entangled":
        kwargs["swap_paths"] = st.checkbox("Swap filter inputs", key="scenario_swap")

    try:
        report = run_scenario(name, **kwargs)
    except ValueError as e:
        st.error(str(e))
        return

    col1, col2, col3 = st.columns(3)
    col1.metric("Acceptance", _fmt(report.acceptance))
    col2.metric("Branches", report.branches)
    col3.metric("Concurrence", "-" if report.concurrence is None else _fmt(report.concurrence))
    st.caption(report.description + " · photons: " + ", ".join(report.photons))

    if report.amplitudes is not None:
        st.table([
            {"output": word, "normalized": _fmt_pair(a), "unnormalized": _fmt_pair(report.unnormalized_amplitudes[word])}
            for word, a in report.amplitudes.items()
        ])
    if report.circular_amplitudes is not None:
        st.table([{"circular": word, "amplitude": _fmt_pair(a)} for word, a in report.circular_amplitudes.items()])
    st.table([{"photons": n, "weight": _fmt(w)} for n, w in report.photon_number_weights.items()])


def _handle_error_tab():
    st.markdown(create_icon_header("fas fa-exclamation-triangle", "Detector error analysis"), unsafe_allow_html=True)
    eta = st.session_state.eta if not st.session_state.ideal_detectors else 1.0
    report = error_analysis(eta, 0.0 if st.session_state.ideal_detectors else st.session_state.dark)
    data = report.model_dump()
    rows = []
    for key, quoted in report.quoted_values.items():
        rows.append({"quantity": key, "simulated": _fmt(data[key]), "quoted": _fmt(quoted)})
    st.table(rows)
    st.table([
        {"input": key, "acceptance": _fmt(value)} for key, value in report.hv_input_error_rates.items()
    ])


def _handle_circuit_tab():
    st.markdown(create_icon_header("fas fa-microchip", "Circuit file"), unsafe_allow_html=True)
    bundled = sorted(p.name for p in CIRCUIT_DIR.glob("*.json"))
    choice = st.selectbox("Bundled circuit", bundled, key="circuit_choice")
    text = st.text_area("Circuit JSON", (CIRCUIT_DIR / choice).read_text(encoding="utf-8") if choice else "",
                        height=300, key=f"circuit_text_{choice}")

    if st.button("▶ Run circuit", key="run_circuit"):
        try:
            st.session_state.circuit_report = circuit_report(parse_circuit(text))
        except (CircuitError, ContractViolation, ValueError) as e:
            st.session_state.circuit_report = None
            st.error(str(e))

    report = st.session_state.circuit_report
    if report is not None:
        st.metric("Acceptance", _fmt(report.acceptance))
        rows = []
        for index, branch in enumerate(report.branches):
            for term in branch.terms:
                occupation = ", ".join(f"{k}={v}" for k, v in term.occupation.items()) or "vacuum"
                rows.append({"branch": index, "weight": _fmt(branch.weight), "occupation": occupation,
                             "amplitude": _fmt_pair(term.amplitude)})
        st.table(rows)
