"""
Page configuration and initialization functions
"""
import streamlit as st

from config import get_config
from styling import apply_lab_theme


def setup_page_config():
    """Configure the Streamlit page settings"""
    st.set_page_config(
        page_title="Quantum Filter Simulator",
        page_icon="🔬",
        layout="wide"
    )
    apply_lab_theme()


def create_main_header():
    """Create the main header for the application"""
    st.markdown("""
    <div class="icon-header">
        <i class="fas fa-filter"></i>
        <h1>Two-photon polarization filter</h1>
    </div>
    """, unsafe_allow_html=True)

    st.markdown('<p><i class="fas fa-atom"></i> Linear optics, single-photon ancillas and post-selection, '
                'simulated photon by photon</p>', unsafe_allow_html=True)


def initialize_session_state():
    """Initialize all session state variables"""
    config = get_config()

    # Detector settings shared by every tab
    if 'eta' not in st.session_state:
        st.session_state.eta = config.eta
    if 'dark' not in st.session_state:
        st.session_state.dark = config.dark
    if 'ideal_detectors' not in st.session_state:
        st.session_state.ideal_detectors = True

    # Filter settings
    if 'attenuator_r' not in st.session_state:
        st.session_state.attenuator_r = 0.75
    if 'attenuator_mode' not in st.session_state:
        st.session_state.attenuator_mode = "p2V"

    # Last circuit run
    if 'circuit_report' not in st.session_state:
        st.session_state.circuit_report = None
