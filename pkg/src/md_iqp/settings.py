from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Runtime settings loaded from environment variables.

    Attributes:
        max_qubits: Largest live register (system plus live auxiliaries) the dense
            simulator accepts.
        max_branches: Upper bound on enumerated measurement branches.
        path_iterations: Default split-and-mend iterations for random Hamiltonian paths.
        trajectories: Default number of Monte Carlo noise trajectories.
        threads: Worker threads used by trajectory and experiment fan-out.
        output_dir: Root directory for experiment runs.
        log_level: Root logging level for the CLI and server.
        ssh_max_qubits: Largest SSH chain diagonalized for the reservoir benchmark.
    """

    max_qubits: int = int(os.getenv("MD_IQP_MAX_QUBITS", "24"))
    max_branches: int = int(os.getenv("MD_IQP_MAX_BRANCHES", "4096"))
    path_iterations: int = int(os.getenv("MD_IQP_PATH_ITERS", "2000"))
    trajectories: int = int(os.getenv("MD_IQP_TRAJECTORIES", "2000"))
    threads: int = int(os.getenv("MD_IQP_THREADS", "1"))

    output_dir: str = os.getenv("MD_IQP_OUTPUT_DIR", "runs")
    log_level: str = os.getenv("MD_IQP_LOG_LEVEL", "INFO")

    ssh_max_qubits: int = int(os.getenv("MD_IQP_SSH_MAX_QUBITS", "12"))


settings = Settings()
