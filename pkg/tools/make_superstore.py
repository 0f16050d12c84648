"""Generate the synthetic superstore fixture (fixtures/superstore.csv).

Seeded and deterministic: 1,000 orders, 21 columns, 4 Asia-Pacific
regions. The data is shaped so that North Asia furniture sales collapse
in 2012 (the category's minimum year there), driven by Beijing, Jining,
and Seoul falling from robust 2011 figures to near zero. Sales values
are integers so sum roll-ups decompose exactly.
"""

from __future__ import annotations

import csv
import random
from collections import defaultdict
from datetime import date, timedelta
from pathlib import Path

SEED = 20412
ROWS = 1000
YEARS = (2011, 2012, 2013, 2014)

GEO = {
    "North Asia": {
        "China": ["Beijing", "Jining", "Shanghai"],
        "South Korea": ["Seoul", "Busan"],
        "Japan": ["Tokyo", "Osaka"],
    },
    "Southeast Asia": {
        "Indonesia": ["Jakarta", "Surabaya"],
        "Thailand": ["Bangkok"],
        "Vietnam": ["Hanoi"],
    },
    "Oceania": {
        "Australia": ["Sydney", "Melbourne", "Brisbane"],
        "New Zealand": ["Auckland"],
    },
    "Central Asia": {
        "Kazakhstan": ["Almaty", "Astana"],
        "Uzbekistan": ["Tashkent"],
    },
}

MARKET = "Asia Pacific"

CATEGORIES = {
    "Furniture": ["Bookcases", "Chairs", "Tables"],
    "Office Supplies": ["Binders", "Paper", "Storage"],
    "Technology": ["Phones", "Copiers", "Accessories"],
}

PRODUCTS = {
    "Bookcases": ['Atlantic Metals Mobile 3-Shelf Bookcases, Custom Colors', "Safco Library Shelving"],
    "Chairs": ['Harbour Creations Executive Leather Armchair, Adjustable', "Novimex Ergonomic Chair"],
    "Tables": ['Bevis Round Conference Table, Fully Assembled', "Lesro Training Table"],
    "Binders": ["Cardinal Slant-D Ring Binder", 'Avery Durable Poly Binder, Clear'],
    "Paper": ["Xerox Premium Copy Paper", "Eaton Laser Print Bond"],
    "Storage": ['Fellowes Super Stor/Drawer Files, Letter Size', "Tenex File Box"],
    "Phones": ["Nokia Smart Phone, Full Size", 'Motorola Headset, with Caller ID'],
    "Copiers": ["Canon Wireless Fax", "Hewlett Copy Machine, Laser"],
    "Accessories": ["Logitech Wireless Mouse", 'Memorex Memory Card, Secure Digital'],
}

SHIP_MODES = ["Standard Class", "Second Class", "First Class", "Same Day"]
SEGMENTS = ["Consumer", "Corporate", "Home Office"]

HEADER = [
    "Row ID", "Order ID", "Order Date", "Ship Date", "Ship Mode", "Customer ID",
    "Segment", "City", "Country", "Market", "Region", "Product ID", "Category",
    "Sub-Category", "Product Name", "Sales", "Quantity", "Discount", "Profit",
    "Shipping Cost", "Year",
]

COLLAPSED_CITIES = {"Beijing", "Jining", "Seoul"}


def _order_date(rng: random.Random, year: int) -> date:
    start = date(year, 1, 1)
    return start + timedelta(days=rng.randrange(0, 360))


def _sales(rng: random.Random, region: str, category: str, city: str, year: int) -> int:
    if region == "North Asia" and year == 2012 and (category == "Furniture" or city in COLLAPSED_CITIES):
        return rng.randint(1, 5)  # the collapse
    if region == "North Asia" and category == "Furniture":
        return rng.randint(900, 2600)  # robust elsewhere in time
    if city in COLLAPSED_CITIES and year == 2011:
        return rng.randint(800, 2400)
    return rng.randint(40, 1800)


def generate(path: Path) -> list[list]:
    rng = random.Random(SEED)
    rows = []
    regions = list(GEO)
    for i in range(1, ROWS + 1):
        # cycle regions/years for even coverage, then randomize within
        region = regions[i % len(regions)]
        year = YEARS[(i // len(regions)) % len(YEARS)]
        country = rng.choice(list(GEO[region]))
        city = rng.choice(GEO[region][country])
        category = rng.choice(list(CATEGORIES))
        if region == "North Asia" and i % 3 == 0:
            category = "Furniture"  # keep the storyline dense
        sub = rng.choice(CATEGORIES[category])
        product = rng.choice(PRODUCTS[sub])
        ordered = _order_date(rng, year)
        shipped = ordered + timedelta(days=rng.randint(1, 7))
        sales = _sales(rng, region, category, city, year)
        quantity = rng.randint(1, 9)
        discount = rng.choice([0.0, 0.0, 0.1, 0.2, 0.4])
        profit = round(sales * rng.uniform(-0.15, 0.35), 1)
        shipping = round(sales * rng.uniform(0.02, 0.12), 2)
        rows.append(
            [
                i,
                f"AP-{year}-{100000 + i}",
                ordered.isoformat(),
                shipped.isoformat(),
                rng.choice(SHIP_MODES),
                f"C-{rng.randint(10000, 99999)}",
                rng.choice(SEGMENTS),
                city,
                country,
                MARKET,
                region,
                f"P-{sub[:3].upper()}-{rng.randint(1000, 9999)}",
                category,
                sub,
                product,
                sales,
                quantity,
                discount,
                profit,
                shipping,
                year,
            ]
        )

    _check(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    return rows


def _check(rows: list[list]):
    """Assert the seeded storyline before writing anything."""
    assert len(rows) == ROWS
    assert len(HEADER) == 21

    regions = {r[10] for r in rows}
    assert regions == set(GEO), regions

    furniture_by_year = defaultdict(int)
    city_year = defaultdict(int)
    for r in rows:
        if r[10] == "North Asia" and r[12] == "Furniture":
            furniture_by_year[r[20]] += r[15]
        if r[7] in COLLAPSED_CITIES:
            city_year[(r[7], r[20])] += r[15]
    assert set(furniture_by_year) == set(YEARS)
    low_year = min(furniture_by_year, key=lambda y: furniture_by_year[y])
    assert low_year == 2012, furniture_by_year
    assert furniture_by_year[2012] < min(v for y, v in furniture_by_year.items() if y != 2012) / 10

    for city in COLLAPSED_CITIES:
        assert city_year[(city, 2011)] > 20 * city_year[(city, 2012)], (city, city_year[(city, 2011)], city_year[(city, 2012)])

    # quoting must be exercised: at least one product name contains a comma
    assert any("," in r[14] for r in rows)


if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "fixtures" / "superstore.csv"
    generate(out)
    print(f"wrote {out}")
