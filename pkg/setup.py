from setuptools import setup, find_packages

setup(
    name="neumann-spectra",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy",
        "scipy",
        "pydantic>=2",
        "PyYAML",
        "python-dotenv",
    ],
    entry_points={
        "console_scripts": [
            "neumann-spectra=cli:main",
        ],
    },
)
