#!/usr/bin/env python3
"""Regenerates the sample datasets under data/.

The samples are schema-identical miniatures of the real dumps (MovieLens
ratings/movies CSV, IMDb title.basics/title.ratings TSV, and a labeled
classification CSV) so the test suite and the CLI demos never need a
multi-gigabyte download. Generation is fully seeded; re-running this script
reproduces the committed files byte for byte.
"""

import csv
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

ML_GENRES = [
    "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]

IMDB_GENRES = [
    "Action", "Adventure", "Animation", "Biography", "Comedy", "Crime",
    "Documentary", "Drama", "Family", "Fantasy", "Film-Noir", "Game-Show",
    "History", "Horror", "Music", "Musical", "Mystery", "News", "Reality-TV",
    "Romance", "Sci-Fi", "Short", "Sport", "Talk-Show", "Thriller", "War",
    "Western",
]

NUM_MOVIES = 150
NUM_USERS = 200


def make_movielens(rng):
    out = os.path.join(DATA, "movielens_sample")
    os.makedirs(out, exist_ok=True)

    movies = []
    for mid in range(1, NUM_MOVIES + 1):
        if mid in (37, 142):
            genres = "(no genres listed)"
        else:
            k = rng.choice([1, 1, 2, 2, 2, 3, 3, 4])
            genres = "|".join(sorted(rng.sample(ML_GENRES, k)))
        year = rng.randint(1960, 2019)
        if mid % 25 == 0:
            title = f"Sample Picture, The (No. {mid}) ({year})"
        else:
            title = f"Sample Picture {mid} ({year})"
        movies.append((mid, title, genres))

    with open(os.path.join(out, "movies.csv"), "w", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["movieId", "title", "genres"])
        w.writerows(movies)

    # Popularity skew so that "top 100 of 150" is a meaningful cut.
    weights = [1.0 / (i + 1) ** 0.6 for i in range(NUM_MOVIES)]
    movie_order = list(range(1, NUM_MOVIES + 1))
    rng.shuffle(movie_order)

    genre_of = {mid: g.split("|") if g != "(no genres listed)" else []
                for mid, _, g in movies}

    rows = []
    base_ts = 900000000
    for uid in range(1, NUM_USERS + 1):
        liked = rng.sample(ML_GENRES, 2)
        n = rng.randint(15, 40)
        seen = set()
        while len(seen) < n:
            mid = rng.choices(movie_order, weights=weights, k=1)[0]
            seen.add(mid)
        for mid in sorted(seen):
            if any(g in liked for g in genre_of[mid]):
                r = rng.gauss(4.2, 0.6)
            else:
                r = rng.gauss(2.2, 0.8)
            r = min(5.0, max(0.5, round(r * 2) / 2))
            ts = base_ts + rng.randint(0, 50000000)
            rows.append([uid, mid, f"{r:.1f}", ts])

    # A handful of repeated (user, movie) pairs: the later timestamp is the
    # one that must survive ingestion.
    for uid, mid in [(3, rows[10][1]), (7, rows[200][1]), (11, rows[400][1])]:
        old = next(r for r in rows if r[0] == uid)
        rows.append([uid, old[1], "5.0", base_ts + 60000000])

    rng.shuffle(rows)
    with open(os.path.join(out, "ratings.csv"), "w", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["userId", "movieId", "rating", "timestamp"])
        w.writerows(rows)

    schema = """\
# Column mapping that makes the generic parser read MovieLens files.
user_col userId
item_col movieId
feedback_col rating
timestamp_col timestamp
title_col title
feature_col genres
feature_delim |
feature_empty_token (no genres listed)
scale_min 0.5
scale_max 5.0
scale_step 0.5
"""
    with open(os.path.join(out, "schema_movielens.cfg"), "w") as f:
        f.write(schema)


def make_imdb(rng):
    out = os.path.join(DATA, "imdb_sample")
    os.makedirs(out, exist_ok=True)

    n = 300
    basics = []
    for i in range(1, n + 1):
        tconst = f"tt{i:07d}"
        ttype = rng.choices(["movie", "short", "tvSeries"],
                            weights=[0.78, 0.12, 0.10], k=1)[0]
        if i % 31 == 0:
            genres = r"\N"
        else:
            k = rng.choice([1, 1, 2, 2, 3])
            genres = ",".join(sorted(rng.sample(IMDB_GENRES, k)))
        year = rng.randint(1950, 2021)
        runtime = rng.randint(45, 180) if ttype != "short" else rng.randint(3, 40)
        title = f"Sample Title {i}"
        basics.append([tconst, ttype, title, title, "0", str(year), r"\N",
                       str(runtime), genres])

    with open(os.path.join(out, "title.basics.tsv"), "w", newline="\n") as f:
        f.write("tconst\ttitleType\tprimaryTitle\toriginalTitle\tisAdult\t"
                "startYear\tendYear\truntimeMinutes\tgenres\n")
        for row in basics:
            f.write("\t".join(row) + "\n")

    rated = rng.sample(range(n), 280)
    ratings = []
    for i in sorted(rated):
        tconst = basics[i][0]
        avg = round(rng.uniform(1.2, 9.6), 1)
        votes = int(50 * (1 + rng.paretovariate(0.9)))
        ratings.append([tconst, f"{avg:.1f}", str(votes)])
    # Ratings rows with no matching basics entry must be ignored by the join.
    ratings.append(["tt9999001", "7.5", "1234"])
    ratings.append(["tt9999002", "4.0", "99"])

    with open(os.path.join(out, "title.ratings.tsv"), "w", newline="\n") as f:
        f.write("tconst\taverageRating\tnumVotes\n")
        for row in ratings:
            f.write("\t".join(row) + "\n")


def make_classification(rng):
    out = os.path.join(DATA, "classification_sample")
    os.makedirs(out, exist_ok=True)
    labels = ["politics", "sports", "weather"]
    with open(os.path.join(out, "examples.csv"), "w", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["example_id", "label", "payload"])
        for i in range(1, 13):
            label = labels[(i - 1) % 3]
            w.writerow([f"ex{i:03d}", label, f"document text {i}"])


def main():
    rng = random.Random(20240117)
    make_movielens(rng)
    make_imdb(rng)
    make_classification(rng)
    print("fixtures written under", os.path.normpath(DATA))


if __name__ == "__main__":
    main()
