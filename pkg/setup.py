#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup, find_packages

with open('README.md') as readme_file:
    readme = readme_file.read()

requirements = [
    "numpy",
    "scipy",
    "pandas>=1.5",
    "tqdm",
    "fire",
    "joblib",
]

setup(
    name='geodecomp',
    version='0.1.0',
    description="Trend-periodic decomposition and forecasting of sphere-valued time series",
    long_description=readme,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    install_requires=requirements,
    tests_require=["pytest"],
    license="MIT license",
    zip_safe=False,
    keywords='time-series sphere compositional-data functional-data forecasting',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
    ],
    entry_points={'console_scripts': ['geodecomp=geodecomp.__main__:main']},
    test_suite='tests',
)
