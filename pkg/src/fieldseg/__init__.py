"""fieldseg: score class-agnostic segmentation masks against crop-type rasters.

The pipeline turns multispectral stacks into RGB snapshots at peak
greenness, segments them (built-in color oracle or external maskset files),
flattens the masks into label maps, and measures agreement with multi-class
ground truth using clustering consensus metrics. Label maps can also be
traced into polygon shape maps.
"""

from .errors import (
    ConfigError,
    DataError,
    FieldsegError,
    MaskFormatError,
    UnusableTileError,
)
from .harness import (
    ConsensusReport,
    ExperimentConfig,
    SampleResult,
    color_oracle_segmenter,
    emit_report,
    extract_tails,
    run_experiment,
)
from .masks import (
    BooleanMask,
    LabelMap,
    MaskSet,
    PromptConfig,
    consolidate,
    filter_mmra,
    parse_maskset,
    prompt_grid,
    rle_decode,
    rle_encode,
    write_maskset,
)
from .metrics import (
    ConsensusScores,
    ContingencyTable,
    ari,
    contingency,
    entropy_terms,
    fmi,
    nmi,
    pair_counts,
    score_label_maps,
    score_table,
    v_measure,
)
from .raster import (
    BandTriplet,
    MultispectralStack,
    NdviSeries,
    RgbSnapshot,
    ScreenPolicy,
    StretchPolicy,
    TileSpec,
    compute_ndvi,
    extract_rgb_snapshot,
    sample_select,
    screen_clouds,
    select_max_ndvi_timestep,
    snapshot_at_peak_greenness,
    tile_image,
)
from .vectorize import (
    FieldPolygon,
    ShapeMap,
    build_shape_map,
    connected_components,
    export_geojson,
    rasterize_shape_map,
    trace_boundary,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
