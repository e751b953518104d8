"""
Shared plumbing: errors, configuration and output helpers, literal parsing, data-directory access
"""

from .errors import *
from .multiclaim_connector import MultiClaimConnector
from .literal_parser import normalize_csv_field, parse_literal, render_literal
from .helpers import load_config, setup_logging, write_json_atomic

__all__ = ['MultiClaimConnector', 'normalize_csv_field', 'parse_literal', 'render_literal',
           'load_config', 'setup_logging', 'write_json_atomic']
