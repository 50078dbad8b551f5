#!/usr/bin/env python

from setuptools import find_packages, setup

setup(
    name="slicewise",
    version="0.1.0",
    description="Cost-aware placement of network slice VNFs across edge, distributed and central clouds",
    packages=find_packages(include=["slicewise", "slicewise.*"]),
    entry_points={"console_scripts": ["slicewise = slicewise.cli:main"]},
)
