"""Line protocol for external game-playing processes.

Host to engine, one command per line::

    init <game> <black|white> <seed>   ->  ok
    opponent <move|none>               ->  move <move>
    result <0|0.5|1>                   ->  ok

``result`` carries the engine's own score. Any other reply is a protocol
violation.
"""
from __future__ import annotations

import queue
import subprocess
import threading


class EngineFailure(RuntimeError):
    """The external process died, timed out, or could not be started."""

    def __init__(self, message, diagnostics: str = "", record=None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.record = record


class ProtocolError(RuntimeError):
    def __init__(self, message, line: str = "", record=None):
        super().__init__(message)
        self.line = line
        self.record = record


class ExternalSession:
    def __init__(self, command, timeout: float = 60.0):
        self.command = list(command)
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise EngineFailure(f"cannot start {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        self._stderr = []
        threading.Thread(target=self._pump, args=(self.proc.stdout, self._lines), daemon=True).start()
        threading.Thread(target=self._drain, daemon=True).start()

    @staticmethod
    def _pump(stream, q):
        for line in stream:
            q.put(line)
        q.put(None)

    def _drain(self):
        for line in self.proc.stderr:
            self._stderr.append(line)

    def diagnostics(self) -> str:
        code = self.proc.poll()
        tail = "".join(self._stderr[-20:])
        return f"exit code: {code}\nstderr:\n{tail}"

    def _send(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EngineFailure(f"engine closed its input while sending {line!r}", self.diagnostics()) from exc

    def _recv(self) -> str:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise EngineFailure(f"no reply within {self.timeout} s", self.diagnostics()) from None
        if line is None:
            self.proc.wait(timeout=5)
            raise EngineFailure("engine exited mid-session", self.diagnostics())
        return line.rstrip("\n")

    def request(self, line: str) -> list:
        self._send(line)
        return self._recv().split()

    def init(self, game: str, role: str, seed: int) -> None:
        reply = self.request(f"init {game} {role} {seed}")
        if reply != ["ok"]:
            raise ProtocolError("expected 'ok' after init", " ".join(reply))

    def ask_move(self, opponent_move: str | None) -> str:
        reply = self.request(f"opponent {opponent_move or 'none'}")
        if len(reply) != 2 or reply[0] != "move":
            raise ProtocolError("expected 'move <move>'", " ".join(reply))
        return reply[1]

    def result(self, score: float) -> None:
        token = {0.0: "0", 0.5: "0.5", 1.0: "1"}[score]
        reply = self.request(f"result {token}")
        if reply != ["ok"]:
            raise ProtocolError("expected 'ok' after result", " ".join(reply))

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


def external_handshake(spec, role: str = "black") -> ExternalSession:
    """Start ``spec.external_command`` and run ``init``."""
    session = ExternalSession(spec.external_command, spec.timeout)
    try:
        session.init(spec.engine, role, spec.seed)
    except Exception:
        session.close()
        raise
    return session
