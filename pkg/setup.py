import pathlib
from setuptools import find_packages, setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
DESCRIPTION = (HERE / "README.md").read_text()

# One requirement per line
REQUIRE = (HERE / "requirements.txt").read_text().split()

setup(
    name='msmtree',
    version='0.1',
    description='Class-structure trees for multi-class SVMs by maximum separating margin',
    long_description=DESCRIPTION,
    long_description_content_type="text/markdown",
    platforms='any',
    classifiers=[
        "Operating System :: OS Independent",
        'Programming Language :: Python',
        "Programming Language :: Python :: 3",
        "Intended Audience :: Science/Research",
    ],
    packages=find_packages(include=['src', 'src.*']),
    include_package_data=True,
    install_requires=REQUIRE,
    extras_require={
        'test': ['pytest==8.3.5'],
    },
    entry_points={
        "console_scripts": [
            "msmtree = src:main",
        ]
    },
)
