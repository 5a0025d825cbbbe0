"""Testing agent: app supervision, browser driving, reports, feedback."""

from webforge.testrunner.agent import TestRunner
from webforge.testrunner.driver import BrowserDriver, HttpProbeDriver
from webforge.testrunner.report import (
    DeploymentVerdict,
    DriverAction,
    FeedbackBundle,
    StepTrace,
    TestReport,
    build_feedback,
)
from webforge.testrunner.supervisor import AppInstance, PortAllocator, Supervisor

__all__ = [
    "TestRunner",
    "BrowserDriver",
    "HttpProbeDriver",
    "DeploymentVerdict",
    "DriverAction",
    "FeedbackBundle",
    "StepTrace",
    "TestReport",
    "build_feedback",
    "AppInstance",
    "PortAllocator",
    "Supervisor",
]
