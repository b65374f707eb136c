"""Benchmark harness: synthetic protocols, mesh experiments, sweeps, CLI."""

from .mesh import (
    Mesh,
    compute_vertex_normals,
    load_mesh_off,
    make_flat_patch_mesh,
    make_sphere_mesh,
    save_mesh_off,
)
from .sweeps import (
    KERNEL_FAMILIES,
    SweepRow,
    fit_power_law,
    fne_sweep,
    normal_prediction_experiment,
    read_rows,
    swing_protocol_config,
    time_sweep,
    write_rows,
)
from .synthetic import cube_half_width, gen_synthetic_cloud
