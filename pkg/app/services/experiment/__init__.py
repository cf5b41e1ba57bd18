from .orchestrator import STAGES, ExperimentOrchestrator
