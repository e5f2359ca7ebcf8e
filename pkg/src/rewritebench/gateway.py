"""Prompt rendering and remote-solver orchestration.

Renders the two task prompts, drives a chat-completion endpoint (or an
injected offline backend) with retries and a fixed sampling budget, and
persists every attempt as JSONL so any run can be replayed through the
evaluator without network access.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from .evaluator import (
    EvalRecord,
    evaluate_pbe,
    extract_pbe_prediction,
    extract_permutation,
    normalize_cascade,
)
from .permuter import ReorderInstance
from .proposer import PbeInstance


class TransportError(RuntimeError):
    """Unrecoverable backend failure (retries exhausted, auth, bad envelope)."""


class TransientBackendError(RuntimeError):
    """Retryable failure (connection drop or 5xx status)."""


PBE_PROMPT_TEMPLATE = """\
Follow the instructions below to solve the code completion task:

We will provide the input corpus and corresponding output corpus. Each element in the corpus is a string, and the output is transformed from the corresponding input using an ordered sequence of "replace" programs. You need to find the correctly constructed and ordered sequence of "replace" programs to transform the entire input corpus into the output corpus. Note that the programs can interact with each other in a way that reduces or increases the number of times they are applied on a given input based on where they are ordered in the sequence. This makes it very important to apply them in the correct order.

The programs should be written using only the Python replace function. For example, for a program that replaces all occurrences of "ab" with "bc" it should be written as: replace('ab', 'bc')

Here is an example of the full task:

### Inputs 
["abc", "ebc", "aba"]

### Outputs
["edc", "edc", "aba"]

### Program Sequence
```python
["replace('bc','dc')", "replace('ad','ed')"]
```

While generating the program sequence, you need to abide by the following restrictions:
1. Each program in the sequence should have the form replace(A, B), where A and B are both strings.
2. Both argument strings A and B in replace(A, B) should have length <= {program_length}. A must have length >= 1, while B may be empty (i.e., "").
3. The maximum number of programs in a sequence is {program_num}.
4. You should only consider the Python replace function for specifying programs (each program is a Python replace function). You cannot use any other Python modules or functions.
5. Strictly follow the markdown style convention while presenting your final program sequence, and make sure to enclose it in the ```python markdown style code block.

Now, please generate the sequence of programs corresponding to the following input corpus and output corpus:

### Inputs 
{inputs_list}

### Outputs
{outputs_list}

### Program Sequence
"""

REORDER_PROMPT_TEMPLATE = """\
You are solving a **program ordering puzzle**. Given input-output string pairs and a scrambled list of string replacement programs, your goal is to determine the correct execution order.

## Background

Each program performs a Python string replacement: replace("A", "B") replaces all occurrences of "A" with "B".

**Why order matters:**
- **Feeding:** One program creates substrings that another program can match.
  Example: replace("a","bc") followed by replace("bc","x").
- **Bleeding:** One program removes substrings that another program would have matched.
  Example: replace("ab","x") followed by replace("a","y").

## Your Task

**Inputs:** {inputs}

**Outputs:** {outputs}

**Scrambled Programs** (indices 0 to {n_minus_1}):
{programs_formatted}

Find the ordering [i0, i1, ..., i_{n_minus_1}] such that applying programs in that order transforms each input to its corresponding output.

## Approach

1. Trace through what each program does
2. Identify potential feeding/bleeding interactions
3. Reason about which programs must come before others
4. Verify your ordering produces the expected outputs

## Output Format

Provide your final answer as a JSON array of indices:

```json
[i0, i1, i2, ...]
```

Your ordering must be a permutation of [0, 1, ..., {n_minus_1}].
"""


def _string_list(items: Sequence[str]) -> str:
    return "[" + ", ".join(json.dumps(s) for s in items) + "]"


def render_pbe_prompt(instance: PbeInstance, s_max: int, L_max: int) -> str:
    if s_max < 1 or L_max < 1:
        raise ValueError("s_max and L_max must be at least 1")
    return PBE_PROMPT_TEMPLATE.format(
        program_length=s_max,
        program_num=L_max,
        inputs_list=_string_list(instance.inputs),
        outputs_list=_string_list(instance.outputs),
    )


def render_reorder_prompt(instance: ReorderInstance) -> str:
    programs = "\n".join(
        f"{idx}: {rule.render()}" for idx, rule in enumerate(instance.scrambled)
    )
    return REORDER_PROMPT_TEMPLATE.format(
        inputs=_string_list(instance.inputs),
        outputs=_string_list(instance.outputs),
        n_minus_1=len(instance.scrambled) - 1,
        programs_formatted=programs,
    )


@dataclass(frozen=True)
class SolverConfig:
    endpoint_url: str = ""
    model_id: str = ""
    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: int = 4096
    reasoning_effort: Optional[str] = None
    sampling_budget: int = 1
    max_in_flight: int = 4
    timeout_ms: int = 120_000
    retry_count: int = 3
    api_key_env: str = "REWRITEBENCH_API_KEY"
    early_stop: bool = False

    def __post_init__(self) -> None:
        if self.sampling_budget < 1:
            raise ValueError("sampling_budget must be at least 1")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not (0 < self.top_p <= 1):
            raise ValueError("top_p must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "endpoint_url": self.endpoint_url,
            "model_id": self.model_id,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "reasoning_effort": self.reasoning_effort,
            "sampling_budget": self.sampling_budget,
            "max_in_flight": self.max_in_flight,
            "timeout_ms": self.timeout_ms,
            "retry_count": self.retry_count,
            "api_key_env": self.api_key_env,
            "early_stop": self.early_stop,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        known = set(cls().to_dict())
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown solver keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class BackendResult:
    """One raw backend exchange: HTTP status plus decoded JSON payload."""

    status_code: int
    payload: dict


class ChatBackend(Protocol):
    def send(self, config: SolverConfig, body: dict) -> BackendResult: ...


class HttpChatBackend:
    """Chat-completion backend over HTTP POST.

    The credential is read from the environment variable named by the
    config at request time; nothing credential-shaped is ever accepted from
    configuration files.
    """

    def send(self, config: SolverConfig, body: dict) -> BackendResult:
        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = requests.post(
                config.endpoint_url,
                json=body,
                headers=headers,
                timeout=config.timeout_ms / 1000.0,
            )
        except requests.ConnectionError as exc:
            raise TransientBackendError(str(exc)) from exc
        except requests.Timeout as exc:
            raise TransientBackendError(str(exc)) from exc
        try:
            payload = resp.json()
        except ValueError:
            payload = {}
        return BackendResult(status_code=resp.status_code, payload=payload)


class MockChatBackend:
    """Scripted offline backend.

    ``script`` is a sequence of BackendResult objects, plain strings
    (wrapped as successful responses), or exceptions to raise; consumed in
    order, with the final entry repeated once exhausted.
    """

    def __init__(self, script: Sequence):
        if not script:
            raise ValueError("mock script must be non-empty")
        self.script = list(script)
        self.calls: list[dict] = []
        self._cursor = 0

    @staticmethod
    def ok(text: str, finish_reason: str = "stop") -> BackendResult:
        return BackendResult(
            status_code=200,
            payload={
                "choices": [
                    {
                        "message": {"role": "assistant", "content": text},
                        "finish_reason": finish_reason,
                    }
                ],
                "usage": {"total_tokens": max(1, len(text) // 4)},
            },
        )

    def send(self, config: SolverConfig, body: dict) -> BackendResult:
        self.calls.append(body)
        entry = self.script[min(self._cursor, len(self.script) - 1)]
        self._cursor += 1
        if isinstance(entry, Exception):
            raise entry
        if isinstance(entry, str):
            return self.ok(entry)
        return entry


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str
    token_usage: dict
    retries_used: int


def chat_send(
    prompt: str,
    config: SolverConfig,
    backend: ChatBackend,
    sleep: Callable[[float], None] = time.sleep,
) -> ChatResponse:
    """One chat-completion exchange with exponential-backoff retries.

    Transient failures (connection errors and 5xx statuses) are retried up
    to retry_count times; auth failures and malformed envelopes are fatal.
    """
    body = {
        "model": config.model_id,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
        "top_p": config.top_p,
        "max_tokens": config.max_tokens,
    }
    if config.reasoning_effort is not None:
        body["reasoning_effort"] = config.reasoning_effort

    last_error: Optional[str] = None
    for attempt in range(config.retry_count + 1):
        if attempt:
            sleep(0.5 * 2 ** (attempt - 1))
        try:
            result = backend.send(config, body)
        except TransientBackendError as exc:
            last_error = str(exc)
            continue
        if result.status_code >= 500:
            last_error = f"server error {result.status_code}"
            continue
        if result.status_code in (401, 403):
            raise TransportError(
                f"authentication failure ({result.status_code}); check the "
                f"{config.api_key_env} environment variable"
            )
        if result.status_code != 200:
            raise TransportError(f"unexpected status {result.status_code}")
        try:
            choice = result.payload["choices"][0]
            content = choice["message"]["content"]
            finish = choice.get("finish_reason", "")
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed response envelope: {exc!r}")
        if content is None:
            content = ""
        return ChatResponse(
            text=content,
            finish_reason=finish,
            token_usage=result.payload.get("usage", {}) or {},
            retries_used=attempt,
        )
    raise TransportError(
        f"retries exhausted after {config.retry_count + 1} attempts: {last_error}"
    )


@dataclass
class AttemptLog:
    instance_id: str
    attempt_index: int
    prompt_hash: str
    raw_text: Optional[str]
    finish_reason: str
    token_usage: dict = field(default_factory=dict)
    extracted: bool = False
    eval: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "attempt_index": self.attempt_index,
            "prompt_hash": self.prompt_hash,
            "raw_text": self.raw_text,
            "finish_reason": self.finish_reason,
            "token_usage": self.token_usage,
            "extracted": self.extracted,
            "eval": self.eval,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttemptLog":
        return cls(**data)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _score_pbe_attempt(
    instance: PbeInstance,
    text: str,
    s_max: int,
    L_max: int,
    identity_symbol: str,
    attempt_index: int,
) -> tuple[EvalRecord, bool]:
    extraction = extract_pbe_prediction(text)
    if extraction.is_null:
        record = evaluate_pbe(
            instance, None, identity_symbol=identity_symbol,
            attempt_index=attempt_index,
        )
        return record, False
    normalized = normalize_cascade(
        extraction.last_cascade, s_max=s_max, L_max=L_max,
        identity_symbol=identity_symbol,
    )
    record = evaluate_pbe(
        instance, normalized, identity_symbol=identity_symbol,
        attempt_index=attempt_index,
    )
    return record, True


def solve_with_budget(
    instance,
    config: SolverConfig,
    backend: ChatBackend,
    task_kind: str,
    s_max: int = 3,
    L_max: int = 5,
    identity_symbol: str = "a",
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[Optional[AttemptLog], list[AttemptLog]]:
    """Run the sampling budget for one instance and pick the best attempt.

    All K attempts are issued unless early_stop ends the loop at the first
    pass. Selection for PBE: first passing attempt, else highest edit
    similarity (ties to the lowest index). For reordering: first correct,
    else first non-null.
    """
    if task_kind not in ("pbe", "reorder"):
        raise ValueError(f"unknown task kind {task_kind!r}")
    if task_kind == "pbe":
        prompt = render_pbe_prompt(instance, s_max=s_max, L_max=L_max)
    else:
        prompt = render_reorder_prompt(instance)
    phash = prompt_hash(prompt)

    logs: list[AttemptLog] = []
    for k in range(config.sampling_budget):
        try:
            response = chat_send(prompt, config, backend, sleep=sleep)
            text: Optional[str] = response.text
            finish = response.finish_reason
            usage = response.token_usage
        except TransportError:
            text, finish, usage = None, "transport_error", {}

        if task_kind == "pbe":
            record, extracted = _score_pbe_attempt(
                instance, text or "", s_max, L_max, identity_symbol, k
            )
            eval_dict = record.to_dict()
            passed = record.passed
        else:
            perm = extract_permutation(text or "", len(instance.scrambled))
            from .evaluator import evaluate_reorder

            passed = evaluate_reorder(instance, perm)
            extracted = perm is not None
            eval_dict = {"passed": passed, "perm": perm, "attempt_index": k}
        logs.append(
            AttemptLog(
                instance_id=(
                    instance.id if task_kind == "pbe" else instance.source_id
                ),
                attempt_index=k,
                prompt_hash=phash,
                raw_text=text,
                finish_reason=finish,
                token_usage=usage,
                extracted=extracted,
                eval=eval_dict,
            )
        )
        if passed and config.early_stop:
            break

    selected = select_attempt(logs, task_kind)
    return selected, logs


def select_attempt(logs: Sequence[AttemptLog], task_kind: str) -> Optional[AttemptLog]:
    """Apply the selection rule to a set of scored attempt logs."""
    if not logs:
        return None
    if task_kind == "pbe":
        for log in logs:
            if log.eval and log.eval.get("passed"):
                return log
        return max(
            logs,
            key=lambda lg: (
                lg.eval.get("edit_sim", float("-inf")) if lg.eval else float("-inf"),
                -lg.attempt_index,
            ),
        )
    for log in logs:
        if log.eval and log.eval.get("passed"):
            return log
    for log in logs:
        if log.extracted:
            return log
    return logs[0]


def solve_dataset(
    instances: Sequence,
    config: SolverConfig,
    backend: ChatBackend,
    task_kind: str,
    s_max: int = 3,
    L_max: int = 5,
    identity_symbol: str = "a",
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[list[Optional[AttemptLog]], list[AttemptLog]]:
    """Solve every instance, up to max_in_flight concurrently.

    Results are returned in instance order regardless of completion order.
    """

    def work(inst):
        return solve_with_budget(
            inst, config, backend, task_kind,
            s_max=s_max, L_max=L_max,
            identity_symbol=identity_symbol, sleep=sleep,
        )

    if config.max_in_flight == 1:
        results = [work(inst) for inst in instances]
    else:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            results = list(pool.map(work, instances))
    selected = [sel for sel, _ in results]
    all_logs = [log for _, logs in results for log in logs]
    return selected, all_logs


def persist_attempts(logs: Sequence[AttemptLog], path: str) -> None:
    """Append one JSON object per line; existing content is preserved."""
    with open(path, "a", encoding="utf-8") as fh:
        for log in logs:
            fh.write(json.dumps(log.to_dict()) + "\n")


def load_attempts(path: str) -> list[AttemptLog]:
    logs: list[AttemptLog] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                logs.append(AttemptLog.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"corrupt attempt log at line {lineno}: {exc}")
    return logs
