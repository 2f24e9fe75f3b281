"""mopcheck HTTP API -- reproduction runs and exceptional-degree queries.

Run:
    uv run uvicorn server.main:app --port 8111
"""

import os
from contextlib import asynccontextmanager
from fractions import Fraction

from fastapi import FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from mopcheck import config
from mopcheck.catalog import EXAMPLES, EXCEPTIONAL_OPERATORS
from mopcheck.darboux import exceptional_degrees
from mopcheck.errors import MopError, SpecSemanticError, SpecSyntaxError, WeightError
from mopcheck.report import Report
from mopcheck.reproduce import reproduce
from mopcheck.specio import format_op, parse_operator
from shared import telemetry


@asynccontextmanager
async def lifespan(app: FastAPI):
    config.require_env(config.SERVER_REQUIRED_ENV_VARS)
    yield


app = FastAPI(title="mopcheck", lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


class ReproduceRequest(BaseModel):
    example: str
    params: dict[str, str] = Field(default_factory=dict)
    seed: int = 0
    specializations: int = Field(default=config.DEFAULT_SPECIALIZATIONS, ge=0, le=10)
    nwin: int = Field(default=config.DEFAULT_N_WIN, ge=2, le=30)


class ExceptionalRequest(BaseModel):
    op: str
    nmax: int = Field(default=10, ge=0, le=60)


def _check_key(x_api_key: str | None):
    if x_api_key != os.environ.get("MOP_API_KEY"):
        raise HTTPException(status_code=401, detail="invalid key")


def _fraction(name: str, text: str) -> Fraction:
    try:
        if "." in text:
            raise ValueError("decimal")
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise HTTPException(status_code=422, detail=f"parameter {name} must be an exact rational, got {text!r}")


@app.get("/health")
def health():
    return {"ok": True}


@app.post("/reproduce", response_model=Report)
def reproduce_example(body: ReproduceRequest, x_api_key: str | None = Header(default=None)) -> Report:
    _check_key(x_api_key)
    if body.example not in EXAMPLES:
        raise HTTPException(status_code=404, detail=f"unknown example {body.example!r}")
    params = {k: _fraction(k, v) for k, v in body.params.items()}
    print(f"[server] reproduce {body.example} seed={body.seed}")
    try:
        return reproduce(body.example, params, body.seed, body.specializations, body.nwin)
    except (SpecSyntaxError, SpecSemanticError, WeightError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except MopError as e:
        telemetry.say(f"[server] reproduce failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/exceptional", response_model=Report)
def exceptional(body: ExceptionalRequest, x_api_key: str | None = Header(default=None)) -> Report:
    _check_key(x_api_key)
    src = EXCEPTIONAL_OPERATORS.get(body.op, body.op)
    try:
        d = parse_operator(src)
        found = exceptional_degrees(d, body.nmax)
    except (SpecSyntaxError, SpecSemanticError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except MopError as e:
        raise HTTPException(status_code=500, detail=str(e))
    report = Report(task="exceptional", inputs={"op": format_op(d), "nmax": str(body.nmax)})
    report.values["exceptional degrees"] = "{" + ",".join(str(n) for n in found) + "}"
    return report
