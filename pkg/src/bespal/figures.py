"""Stage-graph export: DOT text and PNG rendering for staged updates.

Figures show consistent bases only and drop the reflexive loops; every
remaining undirected edge is labelled with the agents that share it.
The final relation is drawn restricted to the announcement's starting
field so the picture stays comparable with the intermediate stages.
"""

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx


def stage_graphs(stages):
    """Graphs for every stage, as {name: (nodes, {(n1, n2): agents})}."""
    u = stages.s.universe
    out = {}
    for name, stage in [("s", stages.s),
                        ("s_announced", stages.s_announced),
                        ("s_star", stages.s_star),
                        ("t", stages.t_stage)]:
        field = stage.field & u.closures.consistent
        edges = {}
        for agent in u.agents:
            for m1, m2 in stage.edge_set(agent):
                if m1 != m2 and field >> m1 & 1 and field >> m2 & 1:
                    edges.setdefault((m1, m2), []).append(agent)
        out[name] = _labelled(u, field, edges)

    field = stages.s.field & u.closures.consistent
    edges = {}
    for agent in u.agents:
        for m1 in u.iter_bases(field):
            for m2 in u.iter_bases(stages.r.row(agent, m1) & field):
                if m1 < m2:
                    edges.setdefault((m1, m2), []).append(agent)
    out["r"] = _labelled(u, field, edges)
    return out


def _labelled(u, field, edges):
    nodes = [u.label(m) for m in u.iter_bases(field)]
    named = {(u.label(m1), u.label(m2)): sorted(agents)
             for (m1, m2), agents in edges.items()}
    return nodes, named


def graph_dot(graph):
    nodes, edges = graph
    lines = ["graph stage {", "  node [shape=box, fontsize=10];"]
    for node in nodes:
        lines.append('  "{}";'.format(node))
    for (n1, n2), agents in sorted(edges.items()):
        lines.append('  "{}" -- "{}" [label="{}"];'
                     .format(n1, n2, ",".join(agents)))
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_stages(stages, out_dir, stem, render_png=True, seed=0):
    """Write <stem>.stages.json plus one DOT (and PNG) file per stage."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, stem + ".stages.json")
    with open(path, "w") as handle:
        json.dump(stages.to_json(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    written.append(path)

    for stage_name, graph in stage_graphs(stages).items():
        dot_path = os.path.join(out_dir, "{}.{}.dot".format(stem, stage_name))
        with open(dot_path, "w") as handle:
            handle.write(graph_dot(graph))
        written.append(dot_path)
        if render_png:
            png_path = os.path.join(out_dir,
                                    "{}.{}.png".format(stem, stage_name))
            graph_png(graph, png_path, seed=seed)
            written.append(png_path)
    return written


def graph_png(graph, path, seed=0):
    nodes, edges = graph
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for (n1, n2), agents in edges.items():
        g.add_edge(n1, n2, label=",".join(agents))
    pos = nx.spring_layout(g, seed=seed)
    fig, ax = plt.subplots(figsize=(7, 5))
    nx.draw_networkx_nodes(g, pos, ax=ax, node_color="#cfe2f3",
                           node_size=1400)
    nx.draw_networkx_labels(g, pos, ax=ax, font_size=8)
    nx.draw_networkx_edges(g, pos, ax=ax)
    nx.draw_networkx_edge_labels(
        g, pos, ax=ax, font_size=8,
        edge_labels=nx.get_edge_attributes(g, "label"))
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
