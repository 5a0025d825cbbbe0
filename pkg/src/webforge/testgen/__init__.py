"""Turn a user request into requirements and soap-opera test cases."""

from webforge.testgen.agent import TestGenerator
from webforge.testgen.interchange import (
    SCHEMA_VERSION,
    suite_from_json_dict,
    suite_to_json_dict,
    dump_suite,
    load_suite,
)
from webforge.testgen.model import (
    DataSourceSpec,
    DetailedRequirement,
    Persona,
    Requirement,
    SoapOperaTestCase,
    TestStep,
    TestSuite,
    UserRequest,
)

__all__ = [
    "TestGenerator",
    "SCHEMA_VERSION",
    "suite_from_json_dict",
    "suite_to_json_dict",
    "dump_suite",
    "load_suite",
    "DataSourceSpec",
    "DetailedRequirement",
    "Persona",
    "Requirement",
    "SoapOperaTestCase",
    "TestStep",
    "TestSuite",
    "UserRequest",
]
