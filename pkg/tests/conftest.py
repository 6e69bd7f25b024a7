"""Shared builders: small line topologies and seeded random configurations."""

from __future__ import annotations

import random

from icnsim.model import MS, Prefix
from icnsim.simulator import (
    ConsumerSpec,
    FailureSpec,
    FibRule,
    LinkSpec,
    ProducerSpec,
    RunConfig,
    Topology,
)


def line_config(
    strategy: str,
    *,
    hops: int = 2,
    delay: int = 10 * MS,
    mil: int = 1000 * MS,
    duration: int = 1500 * MS,
    seed: int = 1,
    rate: float = 1.0,
    stop: int = 500 * MS,
    max_retx: int = 0,
    retx_backoff: int = 200 * MS,
    cs_capacity: int = 0,
    loss: float = 0.0,
) -> RunConfig:
    """consumer - r0 - ... - r{hops-1} - producer, one prefix, one route."""
    routers = [f"r{i}" for i in range(hops)]
    nodes = {"cons": "consumer", "prod": "producer"}
    nodes.update({r: "router" for r in routers})
    links = [LinkSpec("cons", routers[0], delay)]
    for left, right in zip(routers, routers[1:]):
        links.append(LinkSpec(left, right, delay, loss))
    links.append(LinkSpec(routers[-1], "prod", delay))
    prefix = Prefix.parse("/c")
    fib = []
    for i, router in enumerate(routers):
        face = routers[i + 1] if i + 1 < hops else "prod"
        fib.append(FibRule(router, prefix, face, hops - i, 1))
    return RunConfig(
        strategy=strategy,
        duration=duration,
        seed=seed,
        mil=mil,
        topology=Topology(nodes=nodes, links=links),
        fib_rules=fib,
        consumers=[
            ConsumerSpec(
                node="cons",
                prefixes=[(prefix, 1.0)],
                rate=rate,
                stop=stop,
                max_retx=max_retx,
                retx_backoff=retx_backoff,
            )
        ],
        producers=[ProducerSpec(node="prod", prefixes=[prefix], payload_size=16)],
        cs_capacity=cs_capacity,
        name="line",
    )


def random_liveness_config(index: int) -> RunConfig:
    """Random connected router graph with arbitrary static routes.

    Router-router links may lose packets and one may fail mid-run; consumer
    and producer attachment links are reliable, mirroring local submission.
    """
    rng = random.Random(f"liveness/{index}")
    n = rng.randint(4, 12)
    routers = [f"r{i}" for i in range(n)]
    nodes = {r: "router" for r in routers}
    links: list[LinkSpec] = []
    linkset: set[frozenset] = set()

    def add_link(a: str, b: str, delay: int, loss: float) -> None:
        links.append(LinkSpec(a, b, delay, loss))
        linkset.add(frozenset((a, b)))

    for i in range(1, n):
        j = rng.randrange(i)
        add_link(routers[i], routers[j], 5 * MS, rng.choice([0.0, 0.0, 0.0, 0.05, 0.1]))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(routers, 2)
        if frozenset((a, b)) not in linkset:
            add_link(a, b, 5 * MS, rng.choice([0.0, 0.0, 0.0, 0.05, 0.1]))

    prefix = Prefix.parse("/c")
    producer_router = rng.choice(routers)
    nodes["prod"] = "producer"
    add_link("prod", producer_router, 1 * MS, 0.0)

    # True hop distances to the content, then random perturbation per face.
    dist = {producer_router: 1}
    frontier = [producer_router]
    while frontier:
        nxt = []
        for node in frontier:
            for link in links:
                if "prod" in (link.a, link.b):
                    continue
                for here, there in ((link.a, link.b), (link.b, link.a)):
                    if here == node and there not in dist:
                        dist[there] = dist[node] + 1
                        nxt.append(there)
        frontier = nxt

    fib = []
    for router in routers:
        if rng.random() < 0.15:
            continue  # deliberately unreachable from here
        neighbors = []
        for link in links:
            if link.a == router and link.b != "prod":
                neighbors.append(link.b)
            elif link.b == router and link.a != "prod":
                neighbors.append(link.a)
        faces = list(neighbors)
        if router == producer_router:
            faces.append("prod")
        rng.shuffle(faces)
        count = rng.randint(1, min(3, len(faces)))
        chosen = faces[:count]
        ranks = list(range(1, count + 1))
        rng.shuffle(ranks)
        for face, rank in zip(chosen, ranks):
            if face == "prod":
                true_hop = 1
            else:
                true_hop = dist.get(face, 12) + 1
            hop = max(1, min(200, true_hop + rng.choice([-2, -1, 0, 0, 0, 1, 2])))
            fib.append(FibRule(router, prefix, face, hop, rank))

    consumers = []
    for i, node in enumerate(rng.sample(routers, rng.randint(1, 2))):
        cname = f"c{i}"
        nodes[cname] = "consumer"
        add_link(cname, node, 1 * MS, 0.0)
        consumers.append(
            ConsumerSpec(
                node=cname,
                prefixes=[(prefix, 1.0)],
                rate=50.0,
                phase=rng.randrange(0, 2 * MS),
                stop=100 * MS,
            )
        )

    failures = []
    if rng.random() < 0.4:
        candidates = [
            l for l in links if {l.a, l.b} <= set(routers)
        ]
        if candidates:
            link = rng.choice(candidates)
            failures.append(FailureSpec(link.a, link.b, rng.randrange(0, 150 * MS)))

    return RunConfig(
        strategy="sifah",
        duration=700 * MS,
        seed=index,
        mil=200 * MS,
        topology=Topology(nodes=nodes, links=links),
        fib_rules=fib,
        consumers=consumers,
        producers=[ProducerSpec(node="prod", prefixes=[prefix], payload_size=8)],
        failures=failures,
        name=f"rand{index}",
    )


def random_ring_ndn_config(index: int) -> RunConfig:
    """Cyclic single-route FIBs with two consumers at different ring points.

    Each consumer's Interest walks the ring until it is absorbed by the other
    consumer router's pending entry, so the nonce never meets itself.
    """
    rng = random.Random(f"ring/{index}")
    k = rng.randint(3, 6)
    ring = [f"v{i}" for i in range(k)]
    nodes = {r: "router" for r in ring}
    nodes["ca"] = "consumer"
    nodes["cb"] = "consumer"
    links = []
    for i in range(k):
        links.append(LinkSpec(ring[i], ring[(i + 1) % k], rng.choice([5, 10, 15]) * MS))
    m = rng.randint(1, k - 1)
    links.append(LinkSpec("ca", ring[0], 1 * MS))
    links.append(LinkSpec("cb", ring[m], 1 * MS))

    prefix = Prefix.parse("/c")
    fib = [FibRule(ring[i], prefix, ring[(i + 1) % k], 7, 1) for i in range(k)]
    consumers = [
        ConsumerSpec(node="ca", prefixes=[(prefix, 1.0)], rate=2.0, stop=400 * MS),
        ConsumerSpec(
            node="cb",
            prefixes=[(prefix, 1.0)],
            rate=2.0,
            phase=rng.randrange(0, 2 * MS),
            stop=400 * MS,
        ),
    ]
    return RunConfig(
        strategy="ndn",
        duration=900 * MS,
        seed=index,
        mil=300 * MS,
        topology=Topology(nodes=nodes, links=links),
        fib_rules=fib,
        consumers=consumers,
        producers=[],
        name=f"ring{index}",
    )
