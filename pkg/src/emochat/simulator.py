"""Discrete-time engine for a chat network with one affective Bot.

One tick runs, in order:

1. newcomers join (inhomogeneous Poisson arrivals);
2. every agent whose delay expires updates its emotions from its recent
   inbox and the recent channel traffic, then acts if it has unread direct
   messages or high arousal (one message, direct with probability g, else a
   channel post), and draws its next delay;
3. moderators who fired fetch the oldest unanswered channel post and either
   forward it to the Bot (probability eps) or answer its author;
4. the Bot answers every message that is due, using its table row for
   targets and a neutral message for everyone else;
5. agents that did not fire relax.

All randomness comes from one seeded numpy Generator consumed in a fixed
order, so a config and seed determine the event log exactly.
"""
from __future__ import annotations

import logging
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from . import botengine
from .botengine import BotTable
from .emokernel import (EMPTY_FIELD, EmotionState, MapParams, direct_fields, mean_fields,
                        sign, update_emotion)
from .population import (MODERATOR, UNLIMITED, AgentProfile, DistributionSet, arrivals,
                         designate_targets, initial_moderator_flags, sample_delay,
                         sample_profile)

logger = logging.getLogger(__name__)

BOT_ID = -1
CHANNEL = -2
ACTIVE = "active"
PASSIVE = "passive"


class Message(NamedTuple):
    tick: int
    sender: int
    recipient: int
    arousal: float
    valence: float


EventLog = List[Message]


class ConfigError(ValueError):
    pass


@dataclass
class BotSpec:
    profile: str = "positive"
    table_file: Optional[str] = None
    table_seed: Optional[int] = None
    delay: int = 1
    n_rows: int = botengine.N_ROWS
    row_len: int = botengine.ROW_LEN


@dataclass
class SimConfig:
    map: MapParams = field(default_factory=MapParams)
    dists: DistributionSet = field(default_factory=DistributionSet)
    bot: BotSpec = field(default_factory=BotSpec)
    forward_fraction: float = 0.5
    arousal_threshold: float = 0.5
    ticks: int = 5000
    seed: int = 1
    n0: int = 200
    n_targets: int = 91
    n_moderators: int = 40
    # newcomers take their first step on the tick they join
    newcomers_fire_on_arrival: bool = True
    # "neutral": agents join with v = 0; "uniform": v ~ U[-1, 1]
    initial_valence: str = "uniform"

    def validate(self) -> None:
        if not 0.0 <= self.forward_fraction <= 1.0:
            raise ConfigError(f"forward_fraction must lie in [0, 1], got {self.forward_fraction}")
        if self.ticks < 0:
            raise ConfigError(f"ticks must be >= 0, got {self.ticks}")
        if self.n0 < self.n_targets:
            raise ConfigError(f"n0={self.n0} is smaller than n_targets={self.n_targets}")
        if self.bot.delay < 1:
            raise ConfigError("bot delay must be >= 1 tick")
        if self.initial_valence not in ("neutral", "uniform"):
            raise ConfigError(f"initial_valence must be 'neutral' or 'uniform', "
                              f"got {self.initial_valence!r}")
        if self.bot.profile not in botengine.PROFILES:
            raise ConfigError(f"unknown bot profile {self.bot.profile!r}")
        self.dists.validate()


@dataclass
class ChatNetwork:
    """Directed message-count graph between agents and the Bot.

    Channel posts are not edges; ``population`` records N_a(t) per tick.
    """

    edges: Counter = field(default_factory=Counter)
    population: List[int] = field(default_factory=list)

    @property
    def nodes(self) -> set:
        out = set()
        for s, r in self.edges:
            out.add(s)
            out.add(r)
        return out

    def add(self, msg: Message) -> None:
        if msg.recipient != CHANNEL:
            self.edges[(msg.sender, msg.recipient)] += 1


class AgentRuntime:
    __slots__ = ("id", "profile", "status", "last_action", "next_fire", "budget_left",
                 "inbox", "unread", "contacts", "_contact_set")

    def __init__(self, agent_id: int, profile: AgentProfile, next_fire: int):
        self.id = agent_id
        self.profile = profile
        self.status = PASSIVE
        self.last_action = -1
        self.next_fire = next_fire
        self.budget_left = profile.n_c
        self.inbox: Deque[Message] = deque()
        self.unread = 0
        self.contacts: List[int] = []
        self._contact_set = set()

    def add_contact(self, other: int) -> None:
        if other != self.id and other not in self._contact_set:
            self._contact_set.add(other)
            self.contacts.append(other)


@dataclass
class SimResult:
    log: EventLog
    network: ChatNetwork
    targets: List[int]
    target_valence: np.ndarray   # shape (ticks, n_targets), state after each tick
    profiles: List[AgentProfile]
    config: SimConfig


def build_bot_table(config: SimConfig) -> BotTable:
    bot = config.bot
    if bot.table_file:
        table = botengine.load_bot_table(bot.table_file, config.map.eps)
        if table.profile != bot.profile:
            raise ConfigError(f"table file declares profile {table.profile!r}, "
                              f"config asks for {bot.profile!r}")
        return table
    seed = bot.table_seed if bot.table_seed is not None else config.seed
    # separate stream so the table never shifts the simulation's draws
    rng = np.random.default_rng([seed, 7919])
    return botengine.synthesize_bot_table(bot.profile, bot.n_rows, bot.row_len, rng=rng,
                                          eps=config.map.eps)


class World:
    """Mutable simulation state; advanced by :func:`step`."""

    def __init__(self, config: SimConfig, table: Optional[BotTable] = None):
        config.validate()
        self.config = config
        self.params = config.map
        self.rng = np.random.default_rng(config.seed)
        self.table = table if table is not None else build_bot_table(config)
        self.now = 0
        self.agents: List[AgentRuntime] = []
        self.arousal = np.zeros(0)
        self.valence = np.zeros(0)
        self.schedule: Dict[int, List[int]] = defaultdict(list)
        self.channel: Dict[int, List[Message]] = {}
        self.unanswered: Deque[Message] = deque()
        self.bot_queue: Deque[Tuple[int, int]] = deque()   # (due tick, agent to answer)
        self.network = ChatNetwork()
        self.log: EventLog = []

        flags = initial_moderator_flags(config.n0, config.n_moderators, self.rng)
        for is_mod in flags:
            self._add_agent(is_mod)
        self.targets = designate_targets(flags, config.n_targets, config.n_moderators, self.rng)
        # Bot table rows are 1-based and follow ascending agent id
        self.row_of = {agent: j for j, agent in enumerate(self.targets, start=1)}

    # -- construction -------------------------------------------------------------

    def _add_agent(self, moderator: bool) -> None:
        rng = self.rng
        profile = sample_profile(self.config.dists, moderator, rng)
        agent_id = len(self.agents)
        a0 = rng.uniform(0.0, 1.0)
        v0 = rng.uniform(-1.0, 1.0)  # drawn either way to keep the stream aligned
        if self.config.initial_valence == "neutral":
            v0 = 0.0
        delay = sample_delay(self.config.dists, profile.delay_class, rng)
        if self.now > 0 and self.config.newcomers_fire_on_arrival:
            delay = 0
        agent = AgentRuntime(agent_id, profile, self.now + delay)
        self.agents.append(agent)
        if agent_id >= len(self.arousal):
            grow = max(64, len(self.arousal))
            self.arousal = np.concatenate([self.arousal, np.zeros(grow)])
            self.valence = np.concatenate([self.valence, np.zeros(grow)])
        self.arousal[agent_id] = a0
        self.valence[agent_id] = v0
        self.schedule[agent.next_fire].append(agent_id)

    @property
    def size(self) -> int:
        return len(self.agents)

    def state(self, agent_id: int) -> EmotionState:
        return EmotionState(float(self.arousal[agent_id]), float(self.valence[agent_id]))

    # -- message plumbing ---------------------------------------------------------

    def _emit(self, msg: Message, reply_to: Optional[int] = None) -> None:
        self.log.append(msg)
        self.network.add(msg)
        s, r = msg.sender, msg.recipient
        if r == CHANNEL:
            self.channel.setdefault(msg.tick, []).append(msg)
            self.unanswered.append(msg)
            return
        if s >= 0:
            self.agents[s].add_contact(r)
        if r >= 0:
            agent = self.agents[r]
            agent.add_contact(s)
            inbox = agent.inbox
            inbox.append(msg)
            cutoff = msg.tick - self.params.t0_window
            while inbox and inbox[0].tick <= cutoff:
                inbox.popleft()
            agent.unread += 1
        elif r == BOT_ID:
            who = s if reply_to is None else reply_to
            self.bot_queue.append((msg.tick + self.config.bot.delay, who))

    def _send(self, agent: AgentRuntime, recipient: int) -> None:
        i = agent.id
        self._emit(Message(self.now, i, recipient,
                           float(self.arousal[i]), float(self.valence[i])))

    def _pick_recipient(self, agent: AgentRuntime) -> int:
        rng = self.rng
        if rng.random() >= agent.profile.g:
            return CHANNEL
        if agent.contacts:
            return agent.contacts[int(rng.integers(len(agent.contacts)))]
        if self.size < 2:
            return CHANNEL
        other = int(rng.integers(self.size - 1))
        return other + 1 if other >= agent.id else other

    def channel_window(self) -> List[Message]:
        t0 = self.params.t0_window
        out: List[Message] = []
        for tick in range(self.now - t0 + 1, self.now):
            out.extend(self.channel.get(tick, ()))
        return out


def step(world: World) -> List[Message]:
    """Advance ``world`` by one tick and return the messages emitted."""
    cfg = world.config
    params = world.params
    rng = world.rng
    t = world.now
    start = len(world.log)

    # (1) arrivals
    for _ in range(arrivals(t, cfg.dists, rng)):
        world._add_agent(False)

    # (2) agents whose delay expired
    fired = sorted(world.schedule.pop(t, ()))
    window = world.channel_window()
    mf_by_sign = {r: mean_fields(window, t, params.t0_window, r, params.eps)
                  for r in (-1, 0, 1)}
    for i in fired:
        agent = world.agents[i]
        agent.status = ACTIVE
        state = world.state(i)
        r = sign(state.valence)
        h_direct = (direct_fields(agent.inbox, t, params.t0_window, r, params.eps)
                    if agent.inbox else EMPTY_FIELD)
        new = update_emotion(state, h_direct, mf_by_sign[r], params, fired=True)
        world.arousal[i] = new.arousal
        world.valence[i] = new.valence

        if agent.budget_left > 0 and (agent.unread > 0 or new.arousal >= cfg.arousal_threshold):
            world._send(agent, world._pick_recipient(agent))
            agent.budget_left -= 1
            agent.unread = 0
            agent.last_action = t

        agent.next_fire = t + sample_delay(cfg.dists, agent.profile.delay_class, rng)
        world.schedule[agent.next_fire].append(i)

    # (3) moderator fetch-and-forward
    for i in fired:
        agent = world.agents[i]
        if agent.profile.delay_class != MODERATOR:
            continue
        post = _pop_unanswered(world.unanswered, i)
        if post is None:
            continue
        if rng.random() < cfg.forward_fraction:
            # the Bot answers the post's author, not the moderator
            world._emit(Message(t, i, BOT_ID, post.arousal, post.valence),
                        reply_to=post.sender)
        else:
            world._send(agent, post.sender)

    # (4) Bot replies due now
    queue = world.bot_queue
    while queue and queue[0][0] <= t:
        _, to = queue.popleft()
        a, v = botengine.next_message(world.table, world.row_of.get(to))
        world._emit(Message(t, BOT_ID, to, a, v))

    # (5) relaxation of everyone who did not fire
    n = world.size
    relax = np.ones(n, dtype=bool)
    relax[fired] = False
    world.arousal[:n][relax] *= 1.0 - params.gamma
    world.valence[:n][relax] *= 1.0 - params.gamma
    for i in fired:
        world.agents[i].status = PASSIVE

    # keep only the channel ticks a future window can still see
    for old in [k for k in world.channel if k <= t - params.t0_window + 1]:
        del world.channel[old]

    world.network.population.append(n)
    world.now = t + 1
    return world.log[start:]


def _pop_unanswered(queue: Deque[Message], moderator: int) -> Optional[Message]:
    """Oldest channel post not written by ``moderator`` itself."""
    for k, post in enumerate(queue):
        if post.sender != moderator:
            del queue[k]
            return post
    return None


def run(config: SimConfig, table: Optional[BotTable] = None) -> SimResult:
    """Execute ``config.ticks`` steps from a fresh world."""
    world = World(config, table)
    targets = np.asarray(world.targets, dtype=int)
    target_valence = np.empty((config.ticks, len(targets)))
    for t in range(config.ticks):
        step(world)
        target_valence[t] = world.valence[targets]
    return SimResult(world.log, world.network, world.targets, target_valence,
                     [a.profile for a in world.agents], config)


class ReplayMismatch(ValueError):
    pass


def replay_check(log: Iterable[Message], network: Optional[ChatNetwork] = None) -> ChatNetwork:
    """Rebuild the edge counts from the log alone.

    When ``network`` is given, raise :class:`ReplayMismatch` if its edges
    differ from the rebuilt ones.
    """
    rebuilt = ChatNetwork()
    last = None
    for k, msg in enumerate(log):
        if len(msg) != 5:
            raise ValueError(f"record {k}: expected 5 fields, got {len(msg)}")
        if last is not None and msg.tick < last:
            raise ValueError(f"record {k}: tick {msg.tick} goes backwards (previous {last})")
        last = msg.tick
        rebuilt.add(msg)
    if network is not None and +rebuilt.edges != +network.edges:
        diff = set(rebuilt.edges.items()) ^ set(network.edges.items())
        raise ReplayMismatch(f"network differs from log on {len(diff)} edge entries")
    return rebuilt
