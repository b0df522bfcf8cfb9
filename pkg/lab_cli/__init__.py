# ============================================================================
# lab_cli/__init__.py - Command-line front door, configs and report bundles
# ============================================================================

from .experiment import (
    ExperimentConfig,
    SCHEMA_VERSION,
    parse_config_text,
    load_config,
    config_to_text,
)

from .artifacts import (
    ArtifactTree,
    write_json,
    write_csv,
    slug,
)

from .corpus import (
    FamilyMember,
    build_family,
    family_for,
)

from .bundle import (
    report_bundle,
)

from .app import (
    cli_run,
    build_parser,
    EXIT_OK,
    EXIT_ERROR,
    EXIT_VERIFICATION,
    EXIT_USAGE,
)

__all__ = [
    'ExperimentConfig',
    'SCHEMA_VERSION',
    'parse_config_text',
    'load_config',
    'config_to_text',
    'ArtifactTree',
    'write_json',
    'write_csv',
    'slug',
    'FamilyMember',
    'build_family',
    'family_for',
    'report_bundle',
    'cli_run',
    'build_parser',
    'EXIT_OK',
    'EXIT_ERROR',
    'EXIT_VERIFICATION',
    'EXIT_USAGE',
]
