"""Discrete-event DTAP world: grid topology, delayed message transport,
task lifecycle (arrival, forwarding, FCFS queueing, execution, feedback).

Time is hybrid: decisions and message deliveries happen on integer ticks,
service durations are real-valued, and a completion is finalized at the
first tick at or after its completion instant. Within a tick the order is
fixed: deliver messages, generate arrivals, dispatch received tasks, apply
reward feedback, then advance execution (completions before starts).
Agents are processed in ascending id and messages in (deliver_at, send
sequence) order, so a run is a deterministic function of (config, seed).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .learners import GIGA_WOLF, LearnerConfig

REQUEST = 0
UPDATE = 1

LOCAL = 0  # action 0 executes locally; action j >= 1 forwards to neighbors[j-1]

# Service durations snap up to this dyadic grid so that every timestamp and
# every difference of timestamps below 2^27 time units is exact in float64.
TIME_GRID_BITS = 26
TIME_GRID = 2.0**-TIME_GRID_BITS


def quantize_duration(s: float) -> float:
    ticks = math.ceil(s * (1 << TIME_GRID_BITS))
    return max(ticks, 1) * TIME_GRID


@dataclass(frozen=True)
class Topology:
    rows: int
    cols: int
    adjacent_delay: int
    neighbors: tuple[tuple[int, ...], ...]

    @property
    def n_agents(self) -> int:
        return self.rows * self.cols

    def position(self, agent: int) -> tuple[int, int]:
        return divmod(agent, self.cols)

    def delay(self, i: int, j: int) -> float:
        """adjacent_delay per unit of Euclidean grid distance."""
        ri, ci = self.position(i)
        rj, cj = self.position(j)
        return self.adjacent_delay * math.hypot(ri - rj, ci - cj)

    def n_actions(self, agent: int) -> int:
        return 1 + len(self.neighbors[agent])

    @property
    def max_actions(self) -> int:
        return 1 + max(len(n) for n in self.neighbors)


def build_grid(rows: int, cols: int, adjacent_delay: int) -> Topology:
    """Grid of rows*cols agents with 4-neighborhoods, neighbors in ascending id."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {rows}x{cols}")
    if adjacent_delay < 1:
        raise ValueError(f"adjacent_delay must be >= 1, got {adjacent_delay}")
    neighbors = []
    for r in range(rows):
        for c in range(cols):
            adj = []
            if r > 0:
                adj.append((r - 1) * cols + c)
            if c > 0:
                adj.append(r * cols + c - 1)
            if c < cols - 1:
                adj.append(r * cols + c + 1)
            if r < rows - 1:
                adj.append((r + 1) * cols + c)
            neighbors.append(tuple(adj))
    return Topology(rows=rows, cols=cols, adjacent_delay=int(adjacent_delay), neighbors=tuple(neighbors))


@dataclass(slots=True)
class HopRecord:
    agent: int
    receipt_time: int
    action_taken: int


@dataclass(slots=True)
class Task:
    id: int
    origin: int
    arrival_time: int
    service_duration: float
    trail: list[HopRecord] = field(default_factory=list)
    start_time: float = -1.0
    completion_time: float = -1.0
    enqueue_seq: int = -1

    def tst(self) -> float:
        """Total service time: routing + queue wait + execution."""
        if self.completion_time < 0:
            raise ValueError(f"task {self.id} has not completed")
        return self.completion_time - self.arrival_time


@dataclass(slots=True)
class Message:
    kind: int
    src: int
    dst: int
    task_id: int
    deliver_at: int
    seq: int
    hop_index: int = -1  # recipient's hop in the trail (UPDATE only)
    r: float = 0.0  # completion feedback in time units (UPDATE only)


@dataclass(slots=True)
class AgentRuntime:
    id: int
    policy: np.ndarray
    q: np.ndarray
    z: np.ndarray | None
    rng: np.random.Generator
    arrival_rng: np.random.Generator
    queue: deque = field(default_factory=deque)
    inbox: list = field(default_factory=list)
    pending: dict = field(default_factory=dict)  # (task id, hop index) -> receipt time
    action_counts: np.ndarray | None = None
    busy_until: float = 0.0
    executing: int | None = None


class World:
    """One sequential simulation instance."""

    def __init__(
        self,
        topology: Topology,
        learner_cfg: LearnerConfig,
        generator_ids,
        arrival_rate: float,
        service_rate: float,
        seed: int,
        recorder=None,
        hop_cap: int = 0,
        retain_completed: bool = False,
        record_observations: bool = False,
    ):
        if arrival_rate < 0:
            raise ValueError(f"arrival_rate must be >= 0, got {arrival_rate}")
        if service_rate <= 0:
            raise ValueError(f"service_rate must be > 0, got {service_rate}")
        if learner_cfg.epsilon_floor >= 1.0 / topology.max_actions:
            raise ValueError(
                f"epsilon_floor {learner_cfg.epsilon_floor} infeasible for "
                f"{topology.max_actions}-action agents"
            )
        self.topology = topology
        self.cfg = learner_cfg
        self.generator_ids = sorted(int(g) for g in generator_ids)
        self.arrival_rate = float(arrival_rate)
        self.service_rate = float(service_rate)
        self.seed = seed
        self.recorder = recorder
        self.hop_cap = int(hop_cap)
        self.retain_completed = retain_completed
        self.record_observations = record_observations

        policy_root, arrival_root = np.random.SeedSequence(seed).spawn(2)
        policy_streams = policy_root.spawn(topology.n_agents)
        arrival_streams = arrival_root.spawn(topology.n_agents)
        giga = learner_cfg.algorithm == GIGA_WOLF

        # agent state lives in row-stacked matrices so one JIT call per tick
        # can apply every queued observation; agents hold row views
        n_agents = topology.n_agents
        width = topology.max_actions
        self._nact = np.array([topology.n_actions(i) for i in range(n_agents)], dtype=np.int64)
        self._P = np.zeros((n_agents, width))
        self._Q = np.zeros((n_agents, width))
        self._Z = np.zeros((n_agents, width))
        self.agents: list[AgentRuntime] = []
        for i in range(n_agents):
            n = int(self._nact[i])
            self._P[i, :n] = 1.0 / n
            if giga:
                self._Z[i, :n] = 1.0 / n
            self.agents.append(
                AgentRuntime(
                    id=i,
                    policy=self._P[i, :n],
                    q=self._Q[i, :n],
                    z=self._Z[i, :n] if giga else None,
                    rng=np.random.Generator(np.random.PCG64(policy_streams[i])),
                    arrival_rng=np.random.Generator(np.random.PCG64(arrival_streams[i])),
                    action_counts=np.zeros(n, dtype=np.int64),
                )
            )

        self.now = 0
        self.calendar: dict[int, list[Message]] = {}
        self.tasks: dict[int, Task] = {}
        self.tasks_generated = 0
        self.tasks_completed = 0
        self.queued_count = 0
        self.executing_count = 0
        self.in_transit_count = 0
        self._msg_seq = 0
        self._enqueue_seq = 0
        self._giga = giga
        # per-tick observation buffer, applied in order by one batch kernel call
        self._obs_agents: list[int] = []
        self._obs_actions: list[int] = []
        self._obs_rewards: list[float] = []
        self.completed: list[tuple[Task, float]] = []
        self.observations: list[tuple[int, int, int, float]] = []

    # -- test and driver hooks -------------------------------------------------

    def inject_task(self, origin: int, service_duration: float) -> Task:
        """Hand a task to `origin`'s inbox; it is dispatched on the next tick."""
        task = Task(
            id=self.tasks_generated,
            origin=origin,
            arrival_time=self.now + 1,
            service_duration=quantize_duration(service_duration),
        )
        self.tasks_generated += 1
        self.tasks[task.id] = task
        self.agents[origin].inbox.append(task.id)
        return task

    def census(self) -> dict:
        return {
            "generated": self.tasks_generated,
            "completed": self.tasks_completed,
            "queued": self.queued_count,
            "executing": self.executing_count,
            "in_transit": self.in_transit_count,
        }

    def census_scan(self) -> dict:
        """Recount from the data structures (independent of the counters)."""
        queued = sum(len(a.queue) for a in self.agents)
        executing = sum(1 for a in self.agents if a.executing is not None)
        in_transit = sum(
            1 for batch in self.calendar.values() for m in batch if m.kind == REQUEST
        )
        return {
            "generated": self.tasks_generated,
            "completed": self.tasks_completed,
            "queued": queued,
            "executing": executing,
            "in_transit": in_transit,
        }

    # -- event loop ------------------------------------------------------------

    def step(self) -> int:
        """Advance the clock one tick and process everything due at it."""
        now = self.now + 1
        self.now = now
        agents = self.agents

        # (1) deliver messages due now
        updates: list[Message] = []
        batch = self.calendar.pop(now, None)
        if batch is not None:
            for msg in batch:
                if msg.kind == REQUEST:
                    agents[msg.dst].inbox.append(msg.task_id)
                    self.in_transit_count -= 1
                else:
                    updates.append(msg)

        # (2) external arrivals at the generator region
        if self.arrival_rate > 0.0:
            mean_service = 1.0 / self.service_rate
            for gid in self.generator_ids:
                agent = agents[gid]
                count = agent.arrival_rng.poisson(self.arrival_rate)
                for _ in range(count):
                    task = Task(
                        id=self.tasks_generated,
                        origin=gid,
                        arrival_time=now,
                        service_duration=quantize_duration(
                            agent.arrival_rng.exponential(mean_service)
                        ),
                    )
                    self.tasks_generated += 1
                    self.tasks[task.id] = task
                    agent.inbox.append(task.id)

        # (3) dispatch every task received this tick: sample the policy,
        # then enqueue locally or send a REQUEST to the chosen neighbor
        cap = self.hop_cap
        delay = self.topology.adjacent_delay
        neighbors = self.topology.neighbors
        tasks = self.tasks
        for agent in agents:
            inbox = agent.inbox
            if not inbox:
                continue
            if cap:
                actions = [
                    LOCAL
                    if len(tasks[tid].trail) >= cap
                    else int(kernels.sample_index(agent.policy, agent.rng.random()))
                    for tid in inbox
                ]
            else:
                # one draw per task, batch-pulled from this agent's stream
                actions = kernels.sample_indices(agent.policy, agent.rng.random(len(inbox))).tolist()
            my_neighbors = neighbors[agent.id]
            aid = agent.id
            pending = agent.pending
            for tid, action in zip(inbox, actions):
                task = tasks[tid]
                hop = len(task.trail)
                agent.action_counts[action] += 1
                task.trail.append(HopRecord(aid, now, action))
                pending[(tid, hop)] = now
                if action == LOCAL:
                    task.enqueue_seq = self._enqueue_seq
                    self._enqueue_seq += 1
                    agent.queue.append(tid)
                    self.queued_count += 1
                else:
                    self._send(Message(REQUEST, aid, my_neighbors[action - 1], tid, now + delay, self._msg_seq))
                    self.in_transit_count += 1
            agent.inbox = []

        # (4) reward feedback: each UPDATE triggers exactly one learner
        # observation at its recipient, then cascades one hop upstream
        for msg in updates:
            agent = agents[msg.dst]
            task = tasks[msg.task_id]
            hop = msg.hop_index
            record = task.trail[hop]
            agent.pending.pop((msg.task_id, hop))
            r_here = delay + msg.r  # exact: receipt_here = receipt_downstream - delay
            self._queue_observation(agent.id, record.action_taken, -r_here)
            if hop > 0:
                self._send_update(task, hop, r_here)
            elif not self.retain_completed:
                del tasks[msg.task_id]

        # (5) advance execution: finalize due completions (triggering
        # feedback), then let idle agents start their queue head
        for agent in agents:
            tid = agent.executing
            if tid is not None and agent.busy_until <= now:
                self._complete(agent, tasks[tid])
                agent.executing = None
                self.executing_count -= 1
            if agent.executing is None and agent.queue:
                tid = agent.queue.popleft()
                self.queued_count -= 1
                task = tasks[tid]
                start = max(now, agent.busy_until)
                task.start_time = start
                agent.busy_until = start + task.service_duration
                agent.executing = tid
                self.executing_count += 1

        # apply this tick's learner observations in order; policies are only
        # read at the next tick's dispatch, so batching preserves semantics
        if self._obs_agents:
            idx = np.asarray(self._obs_agents, dtype=np.int64)
            acts = np.asarray(self._obs_actions, dtype=np.int64)
            rews = np.asarray(self._obs_rewards)
            cfg = self.cfg
            if self._giga:
                kernels.observe_batch_giga(
                    self._P, self._Q, self._Z, self._nact, idx, acts, rews,
                    cfg.alpha, cfg.eta, cfg.epsilon_floor,
                )
            else:
                kernels.observe_batch_wpl(
                    self._P, self._Q, self._nact, idx, acts, rews,
                    cfg.alpha, cfg.eta, cfg.epsilon_floor,
                )
            self._obs_agents.clear()
            self._obs_actions.clear()
            self._obs_rewards.clear()
        return now

    def run(self, ticks: int) -> None:
        for _ in range(ticks):
            self.step()

    # -- internals ---------------------------------------------------------

    def _send(self, msg: Message) -> None:
        self._msg_seq += 1
        self.calendar.setdefault(msg.deliver_at, []).append(msg)

    def _send_update(self, task: Task, hop: int, r_value: float) -> None:
        """UPDATE from the agent at `hop` to its upstream forwarder."""
        src = task.trail[hop].agent
        dst = task.trail[hop - 1].agent
        self._send(
            Message(
                UPDATE,
                src,
                dst,
                task.id,
                self.now + self.topology.adjacent_delay,
                self._msg_seq,
                hop_index=hop - 1,
                r=r_value,
            )
        )

    def _complete(self, agent: AgentRuntime, task: Task) -> None:
        completion = agent.busy_until
        task.completion_time = completion
        self.tasks_completed += 1
        if self.recorder is not None:
            self.recorder.record_completion(completion - task.arrival_time, completion)
        if self.retain_completed:
            self.completed.append((task, completion))
        hop = len(task.trail) - 1
        receipt = task.trail[hop].receipt_time
        agent.pending.pop((task.id, hop))
        r_here = completion - receipt
        self._queue_observation(agent.id, LOCAL, -r_here)
        if hop > 0:
            self._send_update(task, hop, r_here)
        elif not self.retain_completed:
            del self.tasks[task.id]

    def _queue_observation(self, agent_id: int, action: int, reward: float) -> None:
        self._obs_agents.append(agent_id)
        self._obs_actions.append(action)
        self._obs_rewards.append(reward)
        if self.record_observations:
            self.observations.append((self.now, agent_id, action, reward))
