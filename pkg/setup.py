from setuptools import setup, find_packages
import codecs
import os

here = os.path.abspath(os.path.dirname(__file__))

with codecs.open(os.path.join(here, "README.md"), encoding="utf-8") as fh:
    long_description = "\n" + fh.read()


VERSION = '0.1.0'
DESCRIPTION = 'pylpmatch computes text-to-pattern l_p distances over integer alphabets, exactly with FFT correlations or (1 + eps)-approximately in near-linear time.'

# Setting up
setup(
    name="pylpmatch",
    version=VERSION,
    description=DESCRIPTION,
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=['numpy>=1.22',
                      'pandas>=1.4',
                      'python-dotenv>=1.0.1'],
    extras_require={
        'test': ['pytest>=7.0',
                 'hypothesis>=6.0'],
    },
    entry_points={
        'console_scripts': ['pylpmatch=pylpmatch.cli:main'],
    },
    keywords=['pattern matching', 'l_p distance', 'FFT', 'approximation'],
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires='>=3.8',
)
