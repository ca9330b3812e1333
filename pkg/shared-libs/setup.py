from setuptools import find_packages, setup

setup(
    name="abc-lab-shared",
    version="0.1.0",
    description="Biblioteca compartilhada do laboratório de esquemas AbC em superfícies",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.26",
        "pydantic>=2.9.0",
        "scipy>=1.11",
    ],
    python_requires=">=3.9",
    author="abc-surface-lab",
)
