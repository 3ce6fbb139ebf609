import streamlit as st

def apply_lab_theme():
    """Compact styling for numeric tables, with Font Awesome icons"""
    st.markdown("""
    <style>
    @import url('https://cdnjs.cloudflare.com/ajax/libs/font-awesome/6.4.0/css/all.min.css');

    /* Monospaced numbers line up across rows */
    div[data-testid="stTable"] td, div[data-testid="stDataFrame"] {
        font-family: "SFMono-Regular", Menlo, Consolas, monospace !important;
        font-size: 0.9em !important;
    }

    div[data-testid="metric-container"] {
        border: 1px solid #d0d7de !important;
        border-radius: 8px !important;
        padding: 8px !important;
    }

    .icon-header {
        display: flex;
        align-items: center;
        gap: 10px;
        margin-bottom: 12px;
    }

    .icon-header i {
        font-size: 1.3em;
        color: #1f6feb;
    }
    </style>
    """, unsafe_allow_html=True)

def create_icon_header(icon_class, text):
    """Create a header with an icon"""
    return f"""
    <div class="icon-header">
        <i class="{icon_class}"></i>
        <h3>{text}</h3>
    </div>
    """
