"""FastAPI application exposing the toolkit over HTTP.

Run with ``python -m qtomo.service`` or ``uvicorn qtomo.service.app:app``.
All endpoints are stateless POSTs; computation is pure and seeded, so equal
requests give equal responses.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ContractViolation, QtomoError, UnderdeterminedSystemError
from . import handlers
from .schemas import (
    BuildRequest,
    BuildResponse,
    EtaRequest,
    EtaResponse,
    ReconstructRequest,
    ReconstructResponse,
    ReplayRequest,
    SpectrumRequest,
    SpectrumResponse,
    TrialResultPayload,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(
    title="qtomo",
    version=__version__,
    description=(
        "Evolution generators for N-level open quantum systems, their index "
        "of cyclicity (numeric and closed-form), and stroboscopic state "
        "reconstruction."
    ),
)


@app.exception_handler(UnderdeterminedSystemError)
async def _underdetermined(request: Request, exc: UnderdeterminedSystemError):
    return JSONResponse(
        status_code=409,
        content={"detail": str(exc), "rank": exc.rank, "required": exc.required},
    )


@app.exception_handler(ContractViolation)
async def _contract(request: Request, exc: ContractViolation):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(QtomoError)
async def _generic(request: Request, exc: QtomoError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/")
def root():
    return {
        "name": "qtomo",
        "version": __version__,
        "endpoints": ["/build", "/spectrum", "/eta", "/verify", "/verify/replay",
                      "/reconstruct"],
    }


@app.post("/build", response_model=BuildResponse)
def build(req: BuildRequest):
    return handlers.handle_build(req)


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum(req: SpectrumRequest):
    return handlers.handle_spectrum(req)


@app.post("/eta", response_model=EtaResponse)
def eta(req: EtaRequest):
    return handlers.handle_eta(req)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest):
    return handlers.handle_verify(req)


@app.post("/verify/replay", response_model=TrialResultPayload)
def replay(req: ReplayRequest):
    return handlers.handle_replay(req)


@app.post("/reconstruct", response_model=ReconstructResponse)
def do_reconstruct(req: ReconstructRequest):
    return handlers.handle_reconstruct(req)
