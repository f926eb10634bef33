from .sites import load_sites, write_sites, SITE_COLUMNS
from .config import RunConfig, load_config
from .reports import emit_map_svg, emit_table, format_table
from .pipeline import pipeline_run, MANIFEST_FILE
