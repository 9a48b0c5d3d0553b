"""Stateless HTTP service exposing the toolkit's computations.

Every endpoint is a pure function of its request body: molecules arrive
either as a bundled fixture name or as inline FCIDUMP text, results
return as JSON with the fully resolved request echoed back under
``config`` so emitted files carry their own provenance.  No state is
kept between requests.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .adiabatic import EvolutionConfig, convergence_epsilon, evolve, sweep
from .agp import aga_pool
from .checks import gauge_check_report, render_report
from .fermion import (
    MolecularIntegrals,
    active_space,
    adiabatic_split,
    hartree_fock_occupations,
    map_hamiltonian,
    parse_fcidump,
    slater_condon_energy,
)
from .fixtures import load_fixture
from .pauli import to_dense_matrix, to_text
from .simulator import basis_state, ground_state
from .vqe import (
    CHEMICAL_ACCURACY,
    OptimizerConfig,
    adapt_pool,
    adapt_vqe,
    bond_scan,
    build_aga,
    build_agar,
    build_kupccgsd,
    build_uccsd,
    optimize,
)

import numpy as np

__all__ = ["app", "create_app"]


# ------------------------------------------------------------------ requests


class MoleculeRequest(BaseModel):
    """One molecule: a bundled fixture name or inline FCIDUMP text."""

    fixture: str | None = None
    fcidump: str | None = None
    bond_distance: float | None = None
    mapping: str = "bk"
    freeze: list[int] = Field(default_factory=list)
    discard: list[int] = Field(default_factory=list)


class MapRequest(MoleculeRequest):
    verify: bool = False


class EvolveRequest(MoleculeRequest):
    n_steps: int = 100
    step_size: float = 0.1
    cd_order: int | None = None
    term_order: str = "lexicographic"
    cd_separate_layer: bool = False
    record_trajectory: bool = False


class SweepRequest(MoleculeRequest):
    dt_grid: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4])
    n_grid: list[int] = Field(default_factory=lambda: [10, 25, 50, 100])
    cd_order: int | None = 1


class OptimizerRequest(BaseModel):
    seed: int = 0
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8


class VqeRequest(MoleculeRequest, OptimizerRequest):
    ansatz: str = "aga"
    k: int = 1
    uccsd_mode: str = "index-ordered"
    pool_order: int = 1
    reference_lambda: float = 0.5


class AdaptRequest(MoleculeRequest, OptimizerRequest):
    threshold: float = 1e-3
    max_ops: int = 30


class FcidumpPoint(BaseModel):
    text: str
    bond_distance: float | None = None


class ScanRequest(OptimizerRequest):
    molecule: str | None = None
    fixtures: list[str] = Field(default_factory=list)
    points: list[FcidumpPoint] = Field(default_factory=list)
    mapping: str = "bk"
    freeze: list[int] = Field(default_factory=list)
    discard: list[int] = Field(default_factory=list)
    ansatzes: list[str] = Field(default_factory=lambda: ["aga"])
    pool_order: int = 1
    adapt_threshold: float = 1e-3
    adapt_max_ops: int = 30


class AgpCheckRequest(BaseModel):
    fixture: str = "h2_0.7414"
    mapping: str = "bk"


# ----------------------------------------------------------------- responses


class HealthResponse(BaseModel):
    status: str
    version: str


class MapResponse(BaseModel):
    config: dict
    n_qubits: int
    n_terms: int
    max_weight: int
    weight_histogram: dict[int, int]
    dump: str
    isospectral: bool | None = None
    spectral_deviation: float | None = None


class GroundStateResponse(BaseModel):
    config: dict
    n_qubits: int
    energy: float
    gap: float
    iterations: int
    residual_norm: float
    degenerate: bool
    hf_index: int
    hf_energy: float


class EvolveResponse(BaseModel):
    config: dict
    epsilon: float
    e0: float
    energy: float
    total_time: float
    final_norm: float
    trajectory: list[float] | None = None


class SweepRowModel(BaseModel):
    step_size: float
    n_steps: int
    total_time: float
    eps_bare: float | None = None
    eps_cd: float | None = None
    ratio: float | None = None
    error: str | None = None


class SweepResponse(BaseModel):
    config: dict
    cd_order: int | None
    rows: list[SweepRowModel]
    csv: str


class SelectionModel(BaseModel):
    index: int
    magnitude: float
    norm: float


class VqeResponse(BaseModel):
    config: dict
    label: str
    n_parameters: int
    n_pauli_terms: int
    energy: float
    e0: float
    epsilon: float
    chemical_accuracy: bool
    iterations: int
    gradient_norm: float
    parameters: list[float]
    selections: list[SelectionModel] | None = None


class ScanRowModel(BaseModel):
    bond_distance: float | None = None
    ansatz: str
    n_parameters: int | None = None
    energy: float | None = None
    e0: float | None = None
    epsilon: float | None = None
    chemical_accuracy: bool | None = None
    error: str | None = None


class ScanResponse(BaseModel):
    config: dict
    rows: list[ScanRowModel]
    csv: str


class CheckModel(BaseModel):
    name: str
    value: float
    bound: float
    kind: str
    passed: bool


class AgpCheckResponse(BaseModel):
    config: dict
    fixture: str
    mapping: str
    residual_actions: list[float]
    checks: list[CheckModel]
    passed: bool
    text: str


# ------------------------------------------------------------------- helpers


def _resolve_molecule(req: MoleculeRequest) -> MolecularIntegrals:
    if (req.fixture is None) == (req.fcidump is None):
        raise ValueError("provide exactly one of 'fixture' or 'fcidump'")
    if req.mapping not in ("jw", "bk"):
        raise ValueError(f"unknown mapping {req.mapping!r}")
    if req.fixture is not None:
        integrals = load_fixture(req.fixture)
    else:
        integrals = parse_fcidump(req.fcidump, bond_distance=req.bond_distance)
    if req.freeze or req.discard:
        integrals = active_space(
            integrals, freeze=tuple(req.freeze), discard=tuple(req.discard)
        )
    return integrals


def _optimizer_config(req: OptimizerRequest) -> OptimizerConfig:
    return OptimizerConfig(
        seed=req.seed,
        max_iterations=req.max_iterations,
        gradient_tolerance=req.gradient_tolerance,
    )


def _ansatz_terms(ansatz) -> int:
    return sum(len(list(gen.terms())) for gen, _ in ansatz.generators)


def _build_named_ansatz(req: VqeRequest, split, integrals):
    if req.ansatz in ("aga", "agar"):
        pool = aga_pool(split, req.pool_order, reference_lambda=req.reference_lambda)
        if req.ansatz == "aga":
            return build_aga(pool, req.pool_order)
        return build_agar(pool)
    if req.ansatz == "uccsd":
        return build_uccsd(
            integrals.n_electrons,
            integrals.n_spatial_orbitals,
            req.mapping,
            mode=req.uccsd_mode,
        )
    if req.ansatz == "kupccgsd":
        return build_kupccgsd(
            req.k, integrals.n_electrons, integrals.n_spatial_orbitals, req.mapping
        )
    raise ValueError(
        f"unknown ansatz {req.ansatz!r}, pick from aga, agar, uccsd, kupccgsd"
    )


# ----------------------------------------------------------------------- app


def create_app() -> FastAPI:
    app = FastAPI(
        title="ground-state preparation service",
        version=__version__,
        description=__doc__,
    )

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(KeyError)
    async def _key_error(request, exc: KeyError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/api/map", response_model=MapResponse)
    def map_molecule(req: MapRequest) -> MapResponse:
        integrals = _resolve_molecule(req)
        h = map_hamiltonian(integrals, req.mapping)
        terms = list(h.terms())
        histogram: dict[int, int] = {}
        for word, _ in terms:
            histogram[word.weight] = histogram.get(word.weight, 0) + 1
        isospectral = None
        deviation = None
        if req.verify:
            other = map_hamiltonian(integrals, "bk" if req.mapping == "jw" else "jw")
            if h.n_qubits <= 10:
                spec_a = np.linalg.eigvalsh(to_dense_matrix(h))
                spec_b = np.linalg.eigvalsh(to_dense_matrix(other))
                deviation = float(np.max(np.abs(spec_a - spec_b)))
            else:
                e_a = ground_state(h).energy
                e_b = ground_state(other).energy
                deviation = abs(e_a - e_b)
            isospectral = bool(deviation < 1e-9)
        return MapResponse(
            config=req.model_dump(),
            n_qubits=h.n_qubits,
            n_terms=len(terms),
            max_weight=max((w.weight for w, _ in terms), default=0),
            weight_histogram=histogram,
            dump=to_text(h),
            isospectral=isospectral,
            spectral_deviation=deviation,
        )

    @app.post("/api/ground-state", response_model=GroundStateResponse)
    def ground_state_endpoint(req: MoleculeRequest) -> GroundStateResponse:
        integrals = _resolve_molecule(req)
        split = adiabatic_split(integrals, mapping=req.mapping)
        result = ground_state(split.full(), guess_index=split.hf_index)
        occupations = hartree_fock_occupations(
            integrals.n_electrons, integrals.n_spatial_orbitals
        )
        return GroundStateResponse(
            config=req.model_dump(),
            n_qubits=split.n_qubits,
            energy=result.energy,
            gap=result.gap,
            iterations=result.iterations,
            residual_norm=result.residual_norm,
            degenerate=result.degenerate,
            hf_index=split.hf_index,
            hf_energy=slater_condon_energy(integrals, occupations),
        )

    @app.post("/api/evolve", response_model=EvolveResponse)
    def evolve_endpoint(req: EvolveRequest) -> EvolveResponse:
        integrals = _resolve_molecule(req)
        split = adiabatic_split(integrals, mapping=req.mapping)
        cfg = EvolutionConfig(
            n_steps=req.n_steps,
            step_size=req.step_size,
            cd_order=req.cd_order,
            mapping=req.mapping,
            term_order=req.term_order,
            cd_separate_layer=req.cd_separate_layer,
            record_trajectory=req.record_trajectory,
        )
        initial = basis_state(split.hf_index, split.n_qubits)
        result = evolve(split, initial, cfg)
        e0 = ground_state(split.full(), guess_index=split.hf_index).energy
        eps = convergence_epsilon(result.final, split.full(), e0)
        return EvolveResponse(
            config=req.model_dump(),
            epsilon=eps,
            e0=e0,
            energy=e0 + eps,
            total_time=cfg.total_time,
            final_norm=result.final.norm(),
            trajectory=result.energies,
        )

    @app.post("/api/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        integrals = _resolve_molecule(req)
        split = adiabatic_split(integrals, mapping=req.mapping)
        initial = basis_state(split.hf_index, split.n_qubits)
        result = sweep(split, initial, req.dt_grid, req.n_grid, cd_order=req.cd_order)
        rows = [
            SweepRowModel(
                step_size=r.step_size,
                n_steps=r.n_steps,
                total_time=r.total_time,
                eps_bare=r.eps_bare,
                eps_cd=r.eps_cd,
                ratio=r.ratio,
                error=r.error,
            )
            for r in result.rows
        ]
        return SweepResponse(
            config=req.model_dump(),
            cd_order=result.cd_order,
            rows=rows,
            csv=result.to_csv(),
        )

    @app.post("/api/vqe", response_model=VqeResponse)
    def vqe_endpoint(req: VqeRequest) -> VqeResponse:
        integrals = _resolve_molecule(req)
        split = adiabatic_split(integrals, mapping=req.mapping)
        ansatz = _build_named_ansatz(req, split, integrals)
        initial = basis_state(split.hf_index, split.n_qubits)
        h_full = split.full()
        e0 = ground_state(h_full, guess_index=split.hf_index).energy
        result = optimize(
            ansatz, initial, h_full, cfg=_optimizer_config(req), reference_energy=e0
        )
        return VqeResponse(
            config=req.model_dump(),
            label=ansatz.label,
            n_parameters=ansatz.n_parameters,
            n_pauli_terms=_ansatz_terms(ansatz),
            energy=result.energy,
            e0=e0,
            epsilon=result.epsilon,
            chemical_accuracy=bool(result.epsilon < CHEMICAL_ACCURACY),
            iterations=result.iterations,
            gradient_norm=result.gradient_norm,
            parameters=[float(p) for p in result.parameters],
        )

    @app.post("/api/adapt", response_model=VqeResponse)
    def adapt_endpoint(req: AdaptRequest) -> VqeResponse:
        integrals = _resolve_molecule(req)
        split = adiabatic_split(integrals, mapping=req.mapping)
        pool = adapt_pool(
            integrals.n_electrons, integrals.n_spatial_orbitals, req.mapping
        )
        initial = basis_state(split.hf_index, split.n_qubits)
        h_full = split.full()
        e0 = ground_state(h_full, guess_index=split.hf_index).energy
        run = adapt_vqe(
            pool,
            initial,
            h_full,
            threshold=req.threshold,
            max_ops=req.max_ops,
            cfg=_optimizer_config(req),
            reference_energy=e0,
        )
        return VqeResponse(
            config=req.model_dump(),
            label=run.ansatz.label,
            n_parameters=run.ansatz.n_parameters,
            n_pauli_terms=_ansatz_terms(run.ansatz),
            energy=run.result.energy,
            e0=e0,
            epsilon=run.result.epsilon,
            chemical_accuracy=bool(run.result.epsilon < CHEMICAL_ACCURACY),
            iterations=run.result.iterations,
            gradient_norm=run.result.gradient_norm,
            parameters=[float(p) for p in run.result.parameters],
            selections=[
                SelectionModel(index=s.index, magnitude=s.magnitude, norm=s.norm)
                for s in run.selections
            ],
        )

    @app.post("/api/scan", response_model=ScanResponse)
    def scan_endpoint(req: ScanRequest) -> ScanResponse:
        if req.mapping not in ("jw", "bk"):
            raise ValueError(f"unknown mapping {req.mapping!r}")
        integrals_list = [load_fixture(name) for name in req.fixtures]
        integrals_list += [
            parse_fcidump(p.text, bond_distance=p.bond_distance) for p in req.points
        ]
        if not integrals_list:
            raise ValueError("scan needs at least one molecule point")
        if req.freeze or req.discard:
            integrals_list = [
                active_space(m, freeze=tuple(req.freeze), discard=tuple(req.discard))
                for m in integrals_list
            ]
        distances = [m.bond_distance for m in integrals_list]
        if all(d is not None for d in distances):
            if any(b <= a for a, b in zip(distances, distances[1:])):
                raise ValueError("bond distances must be strictly increasing")
        table = bond_scan(
            integrals_list,
            req.ansatzes,
            opt_cfg=_optimizer_config(req),
            mapping=req.mapping,
            pool_order=req.pool_order,
            adapt_threshold=req.adapt_threshold,
            adapt_max_ops=req.adapt_max_ops,
        )
        rows = [
            ScanRowModel(
                bond_distance=r.bond_distance,
                ansatz=r.ansatz,
                n_parameters=r.n_parameters,
                energy=r.energy,
                e0=r.e0,
                epsilon=r.epsilon,
                chemical_accuracy=r.chemical_accuracy,
                error=r.error,
            )
            for r in table.rows
        ]
        return ScanResponse(config=req.model_dump(), rows=rows, csv=table.to_csv())

    @app.post("/api/agp-check", response_model=AgpCheckResponse)
    def agp_check_endpoint(req: AgpCheckRequest) -> AgpCheckResponse:
        report = gauge_check_report(fixture=req.fixture, mapping=req.mapping)
        return AgpCheckResponse(
            config=req.model_dump(),
            fixture=report["fixture"],
            mapping=report["mapping"],
            residual_actions=report["residual_actions"],
            checks=[CheckModel(**c) for c in report["checks"]],
            passed=report["passed"],
            text=render_report(report),
        )

    return app


app = create_app()
