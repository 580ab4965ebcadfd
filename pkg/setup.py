#!/usr/bin/env python

import sys
from setuptools import setup, find_packages


with open('requirements.txt', 'r') as fh:
    dependencies = [l.strip().split("#")[0] for l in fh if l.strip()]

extras = {}

with open('requirements-tests.txt', 'r') as fh:
    extras['tests'] = [l.strip() for l in fh][1:]

if sys.version_info[0] == 3 and sys.version_info[1] < 8:
    raise Exception('Python 3 version < 3.8 is not supported')

with open('README.rst') as f:
    long_description = f.read()


setup(name='attnfuse',
      version='1.0.0',
      description='Attention level estimation from facial feature streams, with score fusion',
      long_description=long_description,
      author='the attnfuse authors',
      packages=find_packages(exclude=('tests', 'tests.*')),
      license='MIT',
      keywords='attention, facial features, svm, score fusion',
      classifiers=['Development Status :: 4 - Beta',
                   'Environment :: Console',
                   'Environment :: Plugins',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: MIT License',
                   'Operating System :: OS Independent',
                   'Programming Language :: Python',
                   'Programming Language :: Python :: 3.8',
                   'Programming Language :: Python :: 3.9',
                   'Programming Language :: Python :: 3.10',
                   'Programming Language :: Python :: 3.11',
                   'Topic :: Scientific/Engineering :: Artificial Intelligence'],
      install_requires=dependencies,
      extras_require=extras,
      include_package_data=True,
      package_data={'attnfuse': ['plugins/command/*.plugin']},
      python_requires='>=3.8',
      data_files=[
              ('share/doc/attnfuse', ['docs/manual.rst']),
      ],
      entry_points={
          'console_scripts': [
              'attnfuse = attnfuse.__main__:main'
          ]
      },
      )
