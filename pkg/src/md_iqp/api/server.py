from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from md_iqp import __version__
from md_iqp.api.models import ExperimentInfo, ExperimentRunRequest, ExperimentRunResponse
from md_iqp.errors import MdIqpError
from md_iqp.experiments.config import ExperimentConfig
from md_iqp.experiments.registry import list_experiments
from md_iqp.experiments.runner import run_experiment
from md_iqp.settings import settings

logger = logging.getLogger(__name__)

app = FastAPI(title="md-iqp API", version=__version__)

# CORS: allow local dashboards by default
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.get("/experiments", response_model=list[ExperimentInfo])
def experiments() -> list[ExperimentInfo]:
    return [ExperimentInfo(name=n, description=d) for n, d in list_experiments()]


@app.post("/experiments/run", response_model=ExperimentRunResponse)
def run(req: ExperimentRunRequest) -> ExperimentRunResponse:
    """Run one experiment synchronously under ``settings.output_dir``."""
    config = ExperimentConfig(
        name=req.name,
        params=req.params,
        seed=req.seed,
        output_dir=settings.output_dir,
        threads=req.threads,
    )
    try:
        manifest = run_experiment(config)
    except MdIqpError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    except Exception as e:
        logger.exception("experiment %s crashed", req.name)
        raise HTTPException(status_code=500, detail=f"Failed to run experiment: {str(e)}") from e
    return ExperimentRunResponse(
        run_dir=str(manifest.run_dir),
        status=manifest.status,
        passed=manifest.passed,
        files=manifest.files,
    )
