"""Pursuit and reflected-coupling experiments in planar polygon domains.

The package is organised in layers: geometry (domains, membership,
projection), metric (geodesics and the intrinsic distance), pursuit
(greedy lion strategy and its capture bound), coupling (reflected
Brownian pairs and shyness probes), verify (sampled estimate checks),
and a scenario-driven CLI that writes deterministic artifacts.
"""
from .coupling import (
    COUPLING_KINDS,
    BrownianDriver,
    CoupledTrace,
    ShynessReport,
    coupling_identity_check,
    coupling_strategy,
    default_start_pair,
    intrinsic_lip1_check,
    merge_shyness_reports,
    noise_covariance_check,
    projected_step_check,
    rescaled_convergence_experiment,
    shyness_probe,
    shyness_probe_suite,
    simulate_coupled,
)
from .domains import BUNDLED_DOMAINS, bundled_domain
from .errors import (
    Cat0PursuitError,
    CoincidentPoints,
    DegeneratePolygon,
    DegenerateTriangle,
    EpsilonTooLarge,
    NonmonotoneSeparation,
    NotOnBoundary,
    PointOutsideDomain,
    ProbeOutsideDomain,
    RoundingTooLarge,
    ScenarioError,
    SelfIntersecting,
    SharpModeUnsupported,
    StepTooLarge,
)
from .geometry import (
    PolygonalDomain,
    boundary_clearance,
    points_inside,
    project_points,
    project_to_closure,
)
from .metric import (
    GeodesicPath,
    chi,
    geodesic,
    intrinsic_diameter,
    intrinsic_distance,
    separation_and_direction,
)
from .pursuit import (
    STRATEGY_KINDS,
    CaptureBound,
    PursuitTrace,
    capture_time_bound,
    curvature_bound_check,
    evader_strategy,
    first_variation_check,
    simulate_pursuit,
    total_curvature,
)
from .scenario import Scenario, apply_overrides, load_scenario, save_scenario
from .verify import (
    CheckReport,
    cat0_suite,
    cat0_triangle_check,
    chord_approx_check,
    chord_suite,
    direction_lipschitz_check,
    direction_suite,
    fit_power_law,
    gauss_check,
    gauss_suite,
    metric_sandwich_check,
    sandwich_suite,
)

__version__ = "0.1.0"

__all__ = [
    "BUNDLED_DOMAINS",
    "BrownianDriver",
    "COUPLING_KINDS",
    "CaptureBound",
    "Cat0PursuitError",
    "CheckReport",
    "CoincidentPoints",
    "CoupledTrace",
    "DegeneratePolygon",
    "DegenerateTriangle",
    "EpsilonTooLarge",
    "GeodesicPath",
    "NonmonotoneSeparation",
    "NotOnBoundary",
    "PointOutsideDomain",
    "PolygonalDomain",
    "ProbeOutsideDomain",
    "PursuitTrace",
    "RoundingTooLarge",
    "STRATEGY_KINDS",
    "Scenario",
    "ScenarioError",
    "SelfIntersecting",
    "SharpModeUnsupported",
    "ShynessReport",
    "StepTooLarge",
    "apply_overrides",
    "boundary_clearance",
    "bundled_domain",
    "capture_time_bound",
    "cat0_suite",
    "cat0_triangle_check",
    "chi",
    "chord_approx_check",
    "chord_suite",
    "coupling_identity_check",
    "coupling_strategy",
    "curvature_bound_check",
    "default_start_pair",
    "direction_lipschitz_check",
    "direction_suite",
    "evader_strategy",
    "first_variation_check",
    "fit_power_law",
    "gauss_check",
    "gauss_suite",
    "geodesic",
    "intrinsic_diameter",
    "intrinsic_distance",
    "intrinsic_lip1_check",
    "load_scenario",
    "merge_shyness_reports",
    "metric_sandwich_check",
    "noise_covariance_check",
    "points_inside",
    "project_points",
    "project_to_closure",
    "projected_step_check",
    "rescaled_convergence_experiment",
    "sandwich_suite",
    "save_scenario",
    "separation_and_direction",
    "shyness_probe",
    "shyness_probe_suite",
    "simulate_coupled",
    "simulate_pursuit",
    "total_curvature",
]
