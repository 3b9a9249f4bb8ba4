from setuptools import setup, find_packages

# Read the long description from README.md
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="holonomy-toolkit",
    version="0.1.0",
    description="Linearization, Ueda-type classification and invariant sets for commuting holomorphic germs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="Holonomy Toolkit Team",
    py_modules=["cli"],
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "holonomy=cli:main_entry",
        ],
    },
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.7",
        "mpmath>=1.2",
        "sympy>=1.9",
        "joblib>=1.1",
    ],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    include_package_data=True,
)
