"""Out-of-process mask-generator adapter emitting interchange maskset files."""
from .convert import (
    bitmap_from_segmentation,
    is_valid_interchange_file,
    mask_entry,
    rle_row_major,
    write_interchange,
)
from .errors import AdapterError, JobError, ManifestError
from .jobs import AdapterJob, output_path, parse_manifest
from .run import batch, load_snapshot, make_generator_builder, run_amg

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "AdapterJob",
    "JobError",
    "ManifestError",
    "batch",
    "bitmap_from_segmentation",
    "is_valid_interchange_file",
    "load_snapshot",
    "make_generator_builder",
    "mask_entry",
    "output_path",
    "parse_manifest",
    "rle_row_major",
    "run_amg",
    "write_interchange",
]
