#!/usr/bin/env python

from setuptools import setup


setup(name='ocrpsim',
      version='0.1',
      description='Simulation and verification of up-down ordered '
                  'Chinese Restaurant Processes and their contour paths',
      packages=['ocrpsim'],
      data_files=[],
      install_requires=["numpy>=1.17", "scipy>=1.4", "pytest"],
      entry_points={
          'console_scripts': ['ocrpsim=ocrpsim.cli:main'],
      },
      )
