#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates data/toy: a small film KB, three questions, a scripted agent
fixture and a run config. Output is deterministic."""
import json
import random
import sys
from pathlib import Path

FIRST = ["Ana", "Ben", "Chloe", "Dev", "Elif", "Farid", "Greta", "Hugo", "Ines", "Jonas", "Kira", "Luca",
         "Mara", "Nils", "Oona", "Paulo", "Quinn", "Rosa", "Sami", "Tove", "Uma", "Viktor", "Wen", "Yara", "Zeno"]
LAST = ["Ruiz", "Okafor", "Lindqvist", "Patel", "Kaya", "Haddad", "Novak", "Moreau", "Silva", "Berg", "Ito", "Rossi",
        "Costa", "Falk", "Aalto", "Reis", "Adler", "Vega", "Nakamura", "Holm", "Sato", "Petrov", "Zhou", "Diaz", "Marek"]
FILMS = ["Blue Harbor", "The Long Field", "Glass Orchard", "Night Ferry", "Salt and Iron", "Paper Moons", "The Quiet Mile",
         "Winter Library", "Red Canyon Road", "Hollow Bells", "The Ninth Garden", "Copper Sky", "Lantern Street",
         "North of Nowhere", "The Clockmaker", "Silent Regatta", "Autumn Signal", "Marble Coast", "The Last Orchard",
         "Harbor Lights"]
COUNTRIES = [("Norland", "Ostby"), ("Veridia", "Alto Vale"), ("Kestria", "Mirren"), ("Solmark", "Dunholt")]
GENRES = ["drama", "comedy", "thriller", "documentary"]
PREDICATES = [("directed_by", "directed by"), ("starring", "cast member"), ("release_date", "publication date"),
              ("genre", "genre"), ("country_of_origin", "country of origin"), ("born_in", "place of birth"),
              ("nationality", "country of citizenship"), ("capital", "capital"), ("population", "population"),
              ("instance_of", "instance of"), ("character", "character role"), ("runtime", "duration")]


def main(out: Path) -> None:
    rng = random.Random(2024)
    classes = [("Film", "film"), ("Human", "human"), ("Country", "country"), ("City", "city"), ("Genre", "film genre")]
    entities = []
    statements = []

    def st(s, p, o, qualifiers=None):
        rec = {"kind": "statement", "s": s, "p": p, "o": o}
        if qualifiers:
            rec["qualifiers"] = qualifiers
        statements.append(rec)

    node = lambda i: {"node": i}
    for cid, (country, capital) in enumerate(COUNTRIES):
        entities.append({"kind": "entity", "id": f"C{cid}", "label": country})
        entities.append({"kind": "entity", "id": f"T{cid}", "label": capital})
        st(f"C{cid}", "capital", node(f"T{cid}"))
        st(f"C{cid}", "instance_of", node("Country"))
        st(f"T{cid}", "instance_of", node("City"))
        st(f"T{cid}", "population", {"literal": str(rng.randint(80, 900) * 1000), "type": "integer"})
    for gid, genre in enumerate(GENRES):
        entities.append({"kind": "entity", "id": f"G{gid}", "label": genre})
        st(f"G{gid}", "instance_of", node("Genre"))
    people = []
    for pid in range(25):
        pid_s = f"P{pid}"
        people.append(pid_s)
        entities.append({"kind": "entity", "id": pid_s, "label": f"{FIRST[pid]} {LAST[pid]}"})
        st(pid_s, "instance_of", node("Human"))
        country = rng.randrange(len(COUNTRIES))
        st(pid_s, "nationality", node(f"C{country}"))
        st(pid_s, "born_in", node(f"T{country}"))
    for fid, title in enumerate(FILMS):
        f = f"F{fid}"
        entities.append({"kind": "entity", "id": f, "label": title})
        st(f, "instance_of", node("Film"))
        st(f, "directed_by", node(people[fid % 6]))
        year = 1985 + (fid * 7) % 37
        st(f, "release_date", {"literal": f"{year}-{1 + fid % 12:02d}-{1 + fid % 27:02d}", "type": "date"})
        st(f, "genre", node(f"G{fid % len(GENRES)}"))
        st(f, "country_of_origin", node(f"C{fid % len(COUNTRIES)}"))
        st(f, "runtime", {"literal": str(80 + (fid * 11) % 70), "type": "integer"})
        cast = rng.sample(people[6:], 2)
        if fid % 3 == 0:
            cast.append("P6")  # Greta Novak appears in every third film
        for actor in sorted(set(cast)):
            st(f, "starring", node(actor), [{"p": "character", "o": {"literal": f"role {rng.randint(1, 99)}"}}])
    manifest = {"kind": "manifest", "entities": len(entities), "classes": len(classes),
                "predicates": len(PREDICATES), "statements": len(statements)}
    lines = [manifest]
    lines += [{"kind": "class", "id": i, "label": l} for i, l in classes]
    lines += [{"kind": "predicate", "id": i, "label": l} for i, l in PREDICATES]
    lines += entities + statements
    (out / "kb.jsonl").write_text("".join(json.dumps(r, separators=(",", ":")) + "\n" for r in lines))

    def act(thought, call):
        return f"Thought: {thought}\nAction: {call}"

    done = act("The last query answers the question.", "Done")
    questions = [
        {"id": "toy-1", "type": "Conj", "question": "Who directed Blue Harbor?",
         "sparql": "SELECT ?x WHERE { e:F0 p:directed_by ?x }", "anchor": ("F0", "Blue Harbor"), "hint": "director",
         "decoy": "SELECT ?x WHERE { e:F0 p:starring ?x }"},
        {"id": "toy-2", "type": "Compa", "question": "Which films starring Greta Novak were released after 2000?",
         "sparql": "SELECT ?f WHERE { ?f p:starring e:P6 . ?f p:release_date ?d . "
                   "FILTER(?d > \"2000-12-31\"^^xsd:date) }",
         "anchor": ("P6", "Greta Novak"), "hint": "cast member",
         "decoy": "SELECT ?f WHERE { ?f p:starring e:P6 }"},
        {"id": "toy-3", "type": "Count", "question": "How many films did Ana Ruiz direct?",
         "sparql": "SELECT (COUNT(?f) AS ?n) WHERE { ?f p:directed_by e:P0 }", "anchor": ("P0", "Ana Ruiz"),
         "hint": "directed by", "decoy": "SELECT ?f WHERE { ?f p:directed_by e:P0 }"},
    ]
    dataset, fixture = [], []
    for q in questions:
        dataset.append({"id": q["id"], "question": q["question"], "sparql": q["sparql"], "type": q["type"]})
        anchor_id, anchor_label = q["anchor"]
        find = act("Find the entity mentioned in the question.", f'SearchNodes("{anchor_label}")')
        inspect = act("Look at the relations around it.",
                      f'SearchGraphPatterns("SELECT ?e WHERE {{ VALUES ?e {{ e:{anchor_id} }} }}", '
                      f'semantic="{q["hint"]}")')
        gold = {"weight": 2.0, "gold": True,
                "steps": [find, inspect, act("Query the relation.", f"ExecuteSPARQL({q['sparql']})"), done]}
        decoy = {"weight": 1.0, "gold": False,
                 "steps": [find, act("Try a related relation.", f"ExecuteSPARQL({q['decoy']})"), done]}
        fixture.append({"question": q["question"], "branches": [gold, decoy]})
    (out / "dataset.jsonl").write_text("".join(json.dumps(r) + "\n" for r in dataset))
    (out / "agent_fixture.jsonl").write_text("".join(json.dumps(r) + "\n" for r in fixture))
    config = {"early_stop_k": 3, "max_simulations": 30, "depth_penalty": 0.1, "max_preferred_depth": 5,
              "max_rounds": 12, "n_agent": 5, "n_reward": 10, "temperature_agent": 1.0, "temperature_reward": 0.7,
              "seed": 1, "prompt_dir": "../../assets/prompts/freebase"}
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "toy")
