from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
import logging
from pydantic import ValidationError

from config.settings import settings
from modules import commands
from modules import dataValidation as dv
from modules.errors import ReductionError
from modules.graph import Graph, parse_graph
from modules.reduction import ReductionCertificate
from modules.report import build_document, strip_envelope


app = FastAPI(title="critical-ising")


# Error Logging
# Set up logging
logging.basicConfig(level=settings.runtime.log_level)
logger = logging.getLogger(__name__)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    logger.info(f"Request: {request.method} {request.url}")
    try:
        response = await call_next(request)
    except Exception as e:
        logger.exception("Exception occurred while processing request")
        response = JSONResponse(
            status_code=500,
            content={"message": "Internal Server Error"}
        )
    return response

@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc):
    logger.error(f"Validation error: {exc.errors()}")
    return JSONResponse(
        status_code=422,
        content={"detail": exc.errors()}
    )


def _graph(payload: dv.GraphPayload) -> Graph:
    try:
        return parse_graph(payload.text)
    except ReductionError as e:
        raise HTTPException(status_code=422, detail=str(e))


def _run(kind: str, func, *args, **kwargs) -> dict:
    try:
        return build_document(func(*args, **kwargs), kind)
    except (ReductionError, ValidationError) as e:
        logger.error(f"{kind} failed: {e}")
        raise HTTPException(status_code=422, detail=str(e))


# ============================================
# Endpoints
# ============================================

@app.post("/maxcut")
async def maxcut(request: dv.MaxCutRequest):
    return _run("maxcut", commands.run_maxcut, _graph(request.graph))


@app.post("/partition")
async def partition(request: dv.PartitionRequest):
    return _run("partition", commands.run_partition, _graph(request.graph), request.couplings,
                request.method, request.signs)


@app.post("/spectrum")
async def spectrum(request: dv.SpectrumRequest):
    return _run("spectrum", commands.run_spectrum, _graph(request.graph), request.couplings, request.delta)


@app.post("/reduce")
async def reduce(request: dv.ReduceRequest):
    return _run("certificate", commands.run_reduce, _graph(request.graph), request.tau, request.A,
                mode=request.mode, epsilon=request.epsilon, overrides=request.overrides)


@app.post("/decide")
async def decide(request: dv.DecideRequest):
    try:
        cert = ReductionCertificate.model_validate(strip_envelope(request.certificate))
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return _run("decide", commands.run_decide, cert, request.log_z_hat, request.ln_r)
