"""fast api for the quantum filter simulator"""
import json
import logging
from typing import Dict, Literal, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError

from config import setup_logging
from filter_circuit import (
    CircuitParseError,
    CircuitRunReport,
    ContractViolation,
    OperatorReport,
    circuit_report,
    operator_report,
    parse_circuit,
)
from scenarios import ErrorReport, ScenarioReport, error_analysis, run_scenario

__version__ = "1.0.0"

setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title="Quantum Filter Simulator", version=__version__)

# CORS configuration
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class ScenarioRequest(BaseModel):
    name: Literal["entangle", "max-entangled", "ghz4", "encode2", "encode3", "encode-n"] = Field(
        ..., description="Scenario to run", examples=["entangle"])
    ch: complex = Field(0.7071067811865476 + 0j, description="Qubit H coefficient")
    cv: complex = Field(0.7071067811865476 + 0j, description="Qubit V coefficient")
    c1: complex = Field(1 + 0j, description="Entangled-state coefficient c1")
    c2: complex = Field(0j, description="Entangled-state coefficient c2")
    phi: float = Field(0.0, description="Entangled-state relative phase in radians")
    photons: int = Field(3, ge=2, description="Photon number for encode-n")
    eta: Optional[float] = Field(None, ge=0.0, le=1.0, description="Detector efficiency; omit for ideal detectors")
    dark: float = Field(0.0, ge=0.0, le=1.0, description="Dark-count probability per window")
    swap_paths: bool = False


class ErrorAnalysisRequest(BaseModel):
    eta: float = Field(0.88, ge=0.0, le=1.0, description="Detector efficiency")
    dark: float = Field(0.0, ge=0.0, le=1.0, description="Dark-count probability per window")
    dark_rate_cps: Optional[float] = Field(None, ge=0.0, description="Dark counts per second")
    window_s: Optional[float] = Field(None, ge=0.0, description="Detection window in seconds")


class CircuitRequest(BaseModel):
    circuit: dict = Field(..., description="Circuit document in the circuit file schema")
    input: Optional[Dict[str, int]] = Field(None, description="Input occupation; defaults to the document's input")


@app.get("/")
def read_root():
    return {"message": "Welcome to the Quantum Filter Simulator API!", "version": __version__}


@app.get("/operator", response_model=OperatorReport, tags=["Filter"])
def get_operator(
    attenuator_r: float = Query(0.75, ge=0.0, le=1.0),
    attenuator_mode: Literal["p1V", "p2V"] = Query("p2V"),
    phi: Optional[float] = Query(None, description="Compensation phase; omit for automatic"),
):
    """
    Effective polarization operator of the ideal filter.
    """
    try:
        return operator_report(attenuator_r, attenuator_mode, phi)
    except ContractViolation as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/scenario", response_model=ScenarioReport, tags=["Filter"])
def post_scenario(request: ScenarioRequest):
    """
    Run one of the prebuilt filter scenarios.
    """
    params = request.model_dump(exclude={"name"})
    try:
        return run_scenario(request.name, **params)
    except ValidationError as e:
        errors = e.errors(include_url=False, include_context=False, include_input=False)
        raise HTTPException(status_code=422, detail=errors)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/error-analysis", response_model=ErrorReport, tags=["Filter"])
def post_error_analysis(request: ErrorAnalysisRequest):
    """
    Detector error analysis of the filter.
    """
    return error_analysis(request.eta, request.dark, request.dark_rate_cps, request.window_s)


@app.post("/circuit", response_model=CircuitRunReport, tags=["Circuits"])
def post_circuit(request: CircuitRequest):
    """
    Run a circuit document and return the conditioned ensemble.
    """
    try:
        circuit = parse_circuit(json.dumps(request.circuit))
        return circuit_report(circuit, request.input)
    except CircuitParseError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except ContractViolation as e:
        raise HTTPException(status_code=500, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
