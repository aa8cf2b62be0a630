"""Number-field data ingestion, census reports and the self-test suite."""

from .fielddata import FieldRecord, format_field_data, load_census_data, parse_field_data, reconstruct_census

__all__ = ["FieldRecord", "format_field_data", "load_census_data", "parse_field_data", "reconstruct_census"]
