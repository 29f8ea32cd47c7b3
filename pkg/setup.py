#!/usr/bin/env python3

from setuptools import setup

setup(
    name="etf-dynamics",
    version="0.1.0",
    description="Dynamics of entire transcendental functions given as integrals or sums of exponentials",
    packages=["util", "model", "orbits", "measure", "lemmas", "render", "cli"],
    package_dir={"": "src"},
    python_requires=">=3.8",
    install_requires=[
        "aenum",
        "jsonschema",
        "mpmath",
        "numpy",
        "pandas",
        "Pillow",
        "PyYAML",
        "scipy",
        "Shapely",
    ],
    entry_points={"console_scripts": ["etf-dynamics=cli.main:main"]},
)
