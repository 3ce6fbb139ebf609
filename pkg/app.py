"""
Main application entry point

    streamlit run app.py
"""
from config import setup_logging
from page_config import setup_page_config, create_main_header, initialize_session_state
from sidebar_components import create_sidebar
from content_tabs import create_content_tabs


def main():
    """Main application function"""
    setup_page_config()

    # Initialize session state variables
    initialize_session_state()

    create_main_header()
    create_sidebar()
    create_content_tabs()


setup_logging()

if __name__ == "__main__":
    main()
