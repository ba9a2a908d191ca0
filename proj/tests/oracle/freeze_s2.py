#!/usr/bin/env python3
# Copyright 2026 The Flame Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Freezes reference S2 outputs into tests/data/s2_oracle.json.

Run offline with the official s2geometry Python bindings installed:

    python3 tests/oracle/freeze_s2.py

The C++ tests never import this; they only read the frozen JSON.
"""

import json
import math
import os
import random

import s2geometry as s2

EARTH_RADIUS_M = 6371000.0
OUT = os.path.join(os.path.dirname(__file__), "..", "data", "s2_oracle.json")


def point(lat, lng):
    return s2.S2LatLng.FromDegrees(lat, lng).ToPoint()


def cap(lat, lng, radius_m):
    angle = min(math.pi, radius_m / EARTH_RADIUS_M)
    return s2.S2Cap(point(lat, lng), s2.S1Angle.Radians(angle))


def coverer(max_cells, min_level, max_level):
    rc = s2.S2RegionCoverer()
    rc.set_max_cells(max_cells)
    rc.set_min_level(min_level)
    rc.set_max_level(max_level)
    return rc


def run_cover(region, max_cells, min_level, max_level, mode):
    rc = coverer(max_cells, min_level, max_level)
    cells = rc.GetInteriorCovering(region) if mode == "interior" else rc.GetCovering(region)
    return [c.ToToken() for c in cells]


def expected_cells(radius_m, level):
    cell_area = 4 * math.pi * EARTH_RADIUS_M ** 2 / (6 * 4 ** level)
    return math.pi * radius_m ** 2 / cell_area


def random_latlng(rng):
    lat = math.degrees(math.asin(rng.uniform(-1, 1)))
    return lat, rng.uniform(-180, 180)


def offset(lat, lng, east_m, north_m):
    dlat = math.degrees(north_m / EARTH_RADIUS_M)
    dlng = math.degrees(east_m / (EARTH_RADIUS_M * math.cos(math.radians(lat))))
    return lat + dlat, lng + dlng


def quad(rng, lat, lng, size_m):
    # Counter-clockwise in east/north, i.e. interior on the left.
    out = []
    base = rng.uniform(0, 2 * math.pi)
    for k in range(4):
        a = base + k * math.pi / 2 + rng.uniform(-0.4, 0.4)
        r = size_m * rng.uniform(0.6, 1.0)
        out.append(offset(lat, lng, r * math.cos(a), r * math.sin(a)))
    return out


def polygon(verts):
    return s2.S2Polygon(s2.S2Loop([point(a, b) for a, b in verts]))


def single_face(verts):
    faces = {s2.S2CellId(point(a, b)).face() for a, b in verts}
    return len(faces) == 1


def main():
    rng = random.Random(20261016)
    data = {}

    cells = []
    for _ in range(500):
        lat, lng = random_latlng(rng)
        level = rng.randint(0, 30)
        cid = s2.S2CellId(point(lat, lng)).parent(level)
        cells.append({"lat": lat, "lng": lng, "level": level, "token": cid.ToToken()})
    cid = s2.S2CellId(point(40.4433, -79.9436)).parent(13)
    cells.append({"lat": 40.4433, "lng": -79.9436, "level": 13, "token": cid.ToToken()})
    data["cell_ids"] = cells

    verts = []
    for _ in range(100):
        lat, lng = random_latlng(rng)
        level = rng.randint(0, 30)
        cell = s2.S2Cell(s2.S2CellId(point(lat, lng)).parent(level))
        vs = []
        for k in range(4):
            v = cell.GetVertex(k)
            vs.append([v.x(), v.y(), v.z()])
        verts.append({"token": cell.id().ToToken(), "vertices": vs})
    data["cell_vertices"] = verts

    caps = []
    for i in range(600):
        if i % 3 == 0:
            lat, lng = offset(40.4433, -79.9436, rng.uniform(-3000, 3000), rng.uniform(-3000, 3000))
        else:
            lat, lng = random_latlng(rng)
        radius_m = 10 ** rng.uniform(0, 6.5)
        max_cells = rng.choice([1, 2, 3, 4, 5, 8, 10, 16, 20, 64, 100])
        min_level = rng.choice([0, 0, 0, rng.randint(0, 16)])
        # Keep min_level expansions small.
        while min_level > 0 and expected_cells(radius_m, min_level) > 2000:
            min_level -= 1
        max_level = rng.randint(min_level, 30)
        mode = rng.choice(["interior", "exterior"])
        caps.append({
            "lat": lat, "lng": lng, "radius_m": radius_m,
            "max_cells": max_cells, "min_level": min_level, "max_level": max_level,
            "mode": mode,
            "cells": run_cover(cap(lat, lng, radius_m), max_cells, min_level, max_level, mode),
        })
    for r in (5.0, 10.0, 20.0, 30.0, 60.0, 100.0):
        for mode in ("interior", "exterior"):
            caps.append({
                "lat": 40.4433, "lng": -79.9436, "radius_m": r,
                "max_cells": 8, "min_level": 0, "max_level": 23, "mode": mode,
                "cells": run_cover(cap(40.4433, -79.9436, r), 8, 0, 23, mode),
            })
    data["cap_coverings"] = caps

    polys = []
    while len(polys) < 300:
        if len(polys) % 2 == 0:
            lat, lng = offset(40.4433, -79.9436, rng.uniform(-5000, 5000), rng.uniform(-5000, 5000))
        else:
            lat, lng = random_latlng(rng)
            lat = max(-80.0, min(80.0, lat))
        size_m = 10 ** rng.uniform(0.5, 5)
        vs = quad(rng, lat, lng, size_m)
        if not single_face(vs):
            continue
        max_cells = rng.choice([4, 8, 16, 32, 64])
        min_level = rng.choice([0, 0, 10])
        while min_level > 0 and expected_cells(size_m, min_level) > 2000:
            min_level -= 1
        max_level = rng.randint(max(min_level, 12), 30)
        mode = rng.choice(["interior", "exterior"])
        polys.append({
            "vertices": [[a, b] for a, b in vs],
            "max_cells": max_cells, "min_level": min_level, "max_level": max_level,
            "mode": mode,
            "cells": run_cover(polygon(vs), max_cells, min_level, max_level, mode),
        })
    data["polygon_coverings"] = polys

    # A museum-sized quadrilateral registered with the default registration
    # parameters.
    museum = [(40.44300, -79.95050), (40.44290, -79.94930),
              (40.44385, -79.94915), (40.44395, -79.95040)]
    data["museum"] = {
        "vertices": [[a, b] for a, b in museum],
        "cells": run_cover(polygon(museum), 64, 10, 24, "exterior"),
    }

    # Query-set expansion for the fixed test location: base cells of the
    # default interior covering and every ancestor, by hand.
    base = [s2.S2CellId.FromToken(t) for t in run_cover(cap(40.4433, -79.9436, 20.0), 8, 0, 23, "interior")]
    names = set()
    for c in base:
        for level in range(c.level() + 1):
            names.add(c.parent(level).id())
    def order(ids):
        ids = sorted(ids, key=lambda i: (-s2.S2CellId(i).level(), i))
        return [s2.S2CellId(i).ToToken() for i in ids]

    # The default configuration also queries the ancestors of the level-24
    # cell at the center.
    chain = set(names)
    center = s2.S2CellId(point(40.4433, -79.9436)).parent(24)
    for level in range(25):
        chain.add(center.parent(level).id())
    data["query_set_fixture"] = {
        "lat": 40.4433, "lng": -79.9436, "radius_m": 20.0,
        "base": [c.ToToken() for c in base],
        "all": order(names),
        "all_with_center_chain": order(chain),
    }

    with open(OUT, "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
