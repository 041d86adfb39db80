"""
JSON envelope written by every command with --json or --format json.
"""
import json
import os
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = "1.0"
VERSION = "1.0.0"
SCHEMA_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                           "schemas", "run_record.schema.json")


class RunRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    command: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seeds: List[int] = Field(default_factory=list)
    results: List[Dict[str, Any]] = Field(default_factory=list)
    wall_time: float = Field(0.0, ge=0)
    version: str = VERSION

    def to_json(self):
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.model_validate_json(text)


def generated_schema():
    """JSON schema derived from the model; the shipped file is this, pretty-printed"""
    return RunRecord.model_json_schema()


def load_shipped_schema(path: Optional[str] = None):
    with open(path or SCHEMA_FILE, encoding="utf-8") as f:
        return json.load(f)
