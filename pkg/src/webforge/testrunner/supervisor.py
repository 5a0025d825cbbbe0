"""Child-process supervision: launch, readiness probing, log capture, cleanup.

Each application instance runs in its own process group so that stopping it
also reaps any workers it spawned. Ports are allocated from a shared base by
probing for a free bind; the allocator guarantees live instances never share
a port even under concurrent launches.
"""

from __future__ import annotations

import enum
import logging
import os
import shlex
import signal
import socket
import subprocess
import threading
import time
from collections import deque
from dataclasses import dataclass, field

import requests

from webforge.errors import ProbeTimeout, ProcessExited
from webforge.workspace.state import WorkspaceState

logger = logging.getLogger(__name__)

LOG_TAIL = 100


class InstanceState(str, enum.Enum):
    STARTING = "starting"
    READY = "ready"
    FAILED = "failed"
    STOPPED = "stopped"


class PortAllocator:
    def __init__(self, base_port: int = 8900, host: str = "127.0.0.1"):
        self.base_port = base_port
        self.host = host
        self._lock = threading.Lock()
        self._in_use: set[int] = set()

    def acquire(self, preferred: int | None = None) -> int:
        with self._lock:
            candidate = preferred if preferred is not None else self.base_port
            while candidate in self._in_use or not self._bindable(candidate):
                candidate += 1
            self._in_use.add(candidate)
            return candidate

    def release(self, port: int) -> None:
        with self._lock:
            self._in_use.discard(port)

    def _bindable(self, port: int) -> bool:
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            try:
                sock.bind((self.host, port))
                return True
            except OSError:
                return False


@dataclass
class AppInstance:
    process: subprocess.Popen | None
    port: int
    base_url: str
    template_id: str
    probe_path: str = "/"
    state: InstanceState = InstanceState.STARTING
    stdout_lines: deque = field(default_factory=lambda: deque(maxlen=LOG_TAIL))
    stderr_lines: deque = field(default_factory=lambda: deque(maxlen=LOG_TAIL))
    port_released: bool = False

    def log_tail(self) -> str:
        parts = []
        if self.stdout_lines:
            parts.append("stdout:\n" + "\n".join(self.stdout_lines))
        if self.stderr_lines:
            parts.append("stderr:\n" + "\n".join(self.stderr_lines))
        return "\n".join(parts) or "(no output captured)"


def _pump(stream, sink: deque) -> None:
    for line in iter(stream.readline, ""):
        sink.append(line.rstrip("\n"))
    stream.close()


class Supervisor:
    """Launches and stops application instances; tracks them for cleanup."""

    def __init__(
        self,
        allocator: PortAllocator | None = None,
        probe_timeout_s: float = 20.0,
        poll_interval_s: float = 0.05,
    ):
        self.allocator = allocator or PortAllocator()
        self.probe_timeout_s = probe_timeout_s
        self.poll_interval_s = poll_interval_s
        self._live: list[AppInstance] = []
        self._lock = threading.Lock()

    def live_instances(self) -> list[AppInstance]:
        with self._lock:
            return list(self._live)

    def launch(self, ws: WorkspaceState, port: int | None = None) -> AppInstance:
        """Start the template's launch command and wait for readiness.

        Raises ProcessExited when the process dies before the probe succeeds
        and ProbeTimeout when it never becomes ready; both carry the failed
        instance with its captured logs.
        """
        template = ws.template
        actual_port = self.allocator.acquire(port)
        command = shlex.split(template.launch_command.format(port=actual_port))
        instance = AppInstance(
            process=None,
            port=actual_port,
            base_url=f"http://127.0.0.1:{actual_port}",
            template_id=template.template_id,
            probe_path=template.probe.path,
        )
        try:
            instance.process = subprocess.Popen(
                command,
                cwd=ws.root,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                start_new_session=True,
            )
        except OSError as exc:
            instance.state = InstanceState.FAILED
            instance.stderr_lines.append(str(exc))
            self.allocator.release(actual_port)
            raise ProcessExited(f"launch command failed to start: {exc}", instance) from exc

        for stream, sink in (
            (instance.process.stdout, instance.stdout_lines),
            (instance.process.stderr, instance.stderr_lines),
        ):
            threading.Thread(target=_pump, args=(stream, sink), daemon=True).start()

        with self._lock:
            self._live.append(instance)

        logger.debug(
            "launched %s on port %s (pid %s)",
            template.template_id,
            actual_port,
            instance.process.pid,
        )
        probe_url = instance.base_url + template.probe.path
        deadline = time.monotonic() + self.probe_timeout_s
        while time.monotonic() < deadline:
            if instance.process.poll() is not None:
                self._finalize(instance, InstanceState.FAILED)
                raise ProcessExited(
                    f"process exited with code {instance.process.returncode} "
                    f"before becoming ready",
                    instance,
                )
            try:
                response = requests.get(probe_url, timeout=2)
                if response.status_code == template.probe.expected_status:
                    instance.state = InstanceState.READY
                    return instance
            except requests.RequestException:
                pass
            time.sleep(self.poll_interval_s)

        self.stop(instance)
        instance.state = InstanceState.FAILED
        raise ProbeTimeout(
            f"readiness probe {template.probe.path} did not return "
            f"{template.probe.expected_status} within {self.probe_timeout_s}s",
            instance,
        )

    def stop(self, instance: AppInstance) -> None:
        process = instance.process
        if process is not None and process.poll() is None:
            try:
                os.killpg(process.pid, signal.SIGTERM)
            except (ProcessLookupError, PermissionError):
                pass
            try:
                process.wait(timeout=3)
            except subprocess.TimeoutExpired:
                try:
                    os.killpg(process.pid, signal.SIGKILL)
                except (ProcessLookupError, PermissionError):
                    pass
                try:
                    process.wait(timeout=3)
                except subprocess.TimeoutExpired:
                    logger.warning("process %s ignored SIGKILL", process.pid)
        self._finalize(instance, InstanceState.STOPPED)

    def stop_all(self) -> None:
        for instance in self.live_instances():
            self.stop(instance)

    def _finalize(self, instance: AppInstance, state: InstanceState) -> None:
        if instance.state is not InstanceState.FAILED:
            instance.state = state
        # Release exactly once: a second stop() must not free a port that a
        # newer instance has since acquired.
        if not instance.port_released:
            instance.port_released = True
            self.allocator.release(instance.port)
        with self._lock:
            if instance in self._live:
                self._live.remove(instance)
