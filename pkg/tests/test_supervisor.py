from __future__ import annotations

import pytest

from conftest import write_template
from webforge.errors import ProbeTimeout, ProcessExited
from webforge.testrunner.supervisor import InstanceState, PortAllocator, Supervisor
from webforge.workspace import TemplateStore, init_from_template


@pytest.fixture
def crash_workspace(tmp_path):
    store_dir = tmp_path / "store"
    write_template(
        store_dir,
        "crash-exit",
        {"public/index.html": "<h1>never served</h1>\n"},
        launch_command=(
            "python3 -c \"import sys; sys.stderr.write('boom: missing module x\\n'); sys.exit(3)\""
        ),
    )
    return init_from_template(TemplateStore(store_dir).get("crash-exit"), tmp_path / "ws")


def test_launch_static_server_ready(workspace):
    supervisor = Supervisor(probe_timeout_s=15)
    inst = supervisor.launch(workspace)
    try:
        assert inst.state is InstanceState.READY
        import requests

        response = requests.get(inst.base_url + "/", timeout=5)
        assert response.status_code == 200
        assert "Fixture" in response.text
    finally:
        supervisor.stop_all()
    assert supervisor.live_instances() == []


def test_crashing_command_raises_with_logs(crash_workspace):
    supervisor = Supervisor(probe_timeout_s=5)
    with pytest.raises(ProcessExited) as exc_info:
        supervisor.launch(crash_workspace)
    inst = exc_info.value.instance
    assert inst.state is InstanceState.FAILED
    assert "boom: missing module x" in inst.log_tail()
    assert supervisor.live_instances() == []


def test_probe_timeout_for_silent_process(tmp_path):
    store_dir = tmp_path / "store"
    write_template(
        store_dir,
        "silent",
        {"x.txt": "x\n"},
        launch_command='python3 -c "import time; time.sleep(60)"',
    )
    ws = init_from_template(TemplateStore(store_dir).get("silent"), tmp_path / "ws")
    supervisor = Supervisor(probe_timeout_s=1.0)
    with pytest.raises(ProbeTimeout):
        supervisor.launch(ws)
    assert supervisor.live_instances() == []


def test_port_collision_gets_next_free_port(workspace):
    supervisor = Supervisor(probe_timeout_s=15)
    first = supervisor.launch(workspace, port=8931)
    second = supervisor.launch(workspace, port=8931)
    try:
        assert first.port == 8931
        assert second.port != first.port
    finally:
        supervisor.stop_all()


def test_port_allocator_disjoint_under_concurrency():
    import threading

    allocator = PortAllocator(base_port=8951)
    got: list[int] = []
    lock = threading.Lock()

    def grab():
        port = allocator.acquire()
        with lock:
            got.append(port)

    threads = [threading.Thread(target=grab) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(got)) == 8
    for port in got:
        allocator.release(port)


def test_stop_reaps_process_group(workspace):
    import psutil

    supervisor = Supervisor(probe_timeout_s=15)
    inst = supervisor.launch(workspace)
    pid = inst.process.pid
    assert psutil.pid_exists(pid)
    supervisor.stop(inst)
    assert not psutil.pid_exists(pid) or psutil.Process(pid).status() == psutil.STATUS_ZOMBIE


def test_double_stop_releases_port_once(workspace):
    supervisor = Supervisor(probe_timeout_s=15)
    first = supervisor.launch(workspace, port=8975)
    supervisor.stop(first)
    second = supervisor.launch(workspace, port=8975)
    try:
        # Stopping the earlier instance again must not free the reused port.
        supervisor.stop(first)
        assert second.port in supervisor.allocator._in_use
    finally:
        supervisor.stop_all()
