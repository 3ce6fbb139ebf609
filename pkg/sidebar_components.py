"""
Sidebar controls for the filter dashboard
"""
import streamlit as st

from styling import create_icon_header


def create_sidebar():
    """Detector and attenuator controls; values live in session state"""
    with st.sidebar:
        st.markdown(create_icon_header("fas fa-sliders-h", "Detectors"), unsafe_allow_html=True)

        st.checkbox("Ideal detectors", key="ideal_detectors",
                    help="Number-resolving detectors with unit efficiency and no dark counts")
        st.slider("Efficiency η", min_value=0.0, max_value=1.0, step=0.01, key="eta",
                  disabled=st.session_state.ideal_detectors)
        st.number_input("Dark-count probability per window", min_value=0.0, max_value=1.0,
                        step=1e-5, format="%.6f", key="dark",
                        disabled=st.session_state.ideal_detectors)

        st.markdown(create_icon_header("fas fa-adjust", "Attenuator"), unsafe_allow_html=True)
        st.slider("Reflectivity R", min_value=0.0, max_value=1.0, step=0.05, key="attenuator_r")
        st.radio("V rail", ["p2V", "p1V"], horizontal=True, key="attenuator_mode")

        _create_how_to_use_section()


def _create_how_to_use_section():
    """Create the how-to-use section in sidebar"""
    st.markdown(create_icon_header("fas fa-question-circle", "How to Use"), unsafe_allow_html=True)

    st.markdown("""
    - **Operator**: the 4×4 map the filter applies to two polarization qubits
    - **Scenarios**: entangling, GHZ and encoding experiments
    - **Error analysis**: effect of finite detector efficiency
    - **Circuit**: run any circuit file
    """)
