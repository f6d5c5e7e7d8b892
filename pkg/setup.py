# glucoctl
# Copyright 2024 The glucoctl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import io
import os
from setuptools import setup, find_packages

_version = {}
with io.open(os.path.join('glucoctl', 'version.py'), encoding='utf-8') as f:
    exec(f.read(), _version)  # pylint: disable=exec-used

setup(
    name='glucoctl',
    version=_version['version'],
    packages=find_packages(exclude=['tests', 'tests.*', 'integration', 'integration.*']),
    package_data={'glucoctl': ['resources/*.json']},
    install_requires=[
        'click>=7.0',
        'tabulate>=0.7.7',
        'six>=1.10.0',
        'numpy>=1.17',
        'scipy>=1.4',
    ],
    entry_points='''
        [console_scripts]
        glucoctl=glucoctl.cli:cli
    ''',
    zip_safe=False,
    author='The glucoctl Authors',
    description='Closed-loop glucose regulation toolkit: virtual patient, fuzzy and TD3 '
                'controllers',
    long_description=io.open('README.rst', encoding='utf-8').read(),
    license='Apache License 2.0',
    python_requires='>=3.6',
    classifiers=[
        'Intended Audience :: Science/Research',
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: Apache Software License',
    ],
    keywords='glucose insulin simulation fuzzy reinforcement-learning cli',
)
