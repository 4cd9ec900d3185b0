"""Writes the 200-caption fixture corpus used by the noun extraction tests."""
import random
import sys

SUBJECTS = ["a man", "two men", "a woman", "three women", "a child", "the children", "a dog", "two puppies",
            "a cat", "some mice", "a horse", "the geese", "a bus driver", "two buses", "a family", "the firemen",
            "a boy", "two girls", "the sheep", "some deer", "a hawk", "a fox", "the boxes", "a person",
            "two people", "a policeman", "the oxen", "a baby", "the wolves", "some knives"]
VERBS = ["sitting on", "standing next to", "walking past", "riding", "looking at", "lying under",
         "holding", "playing with", "parked near", "leaning against", "running across", "jumping over"]
OBJECTS = ["a bench", "the benches", "a bicycle", "two bikes", "a treadmill", "the dishes", "some churches",
           "a table", "the tables", "a couch", "the glasses", "a bowl of berries", "the branches", "a fence",
           "the houses", "a car", "two taxis", "the skies", "a pile of leaves", "the feet of a statue",
           "the teeth", "a tray of cookies", "the potatoes", "a box of matches", "the bushes", "a row of trucks",
           "the cities", "a stack of dictionaries", "the buses", "a herd of cattle"]
PLACES = ["in a park", "on a street", "at the beach", "in the kitchen", "near the river", "under a tree",
          "in front of a building", "on the grass", "in a field", "at night", "in the snow", "by the windows"]


def main(out_path: str, seed: int = 2024, n: int = 200) -> None:
    rng = random.Random(seed)
    lines = []
    for _ in range(n):
        caption = f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)}"
        if rng.random() < 0.7:
            caption += " " + rng.choice(PLACES)
        if rng.random() < 0.2:
            caption = caption.capitalize() + "."
        lines.append(caption)
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
