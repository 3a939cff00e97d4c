from setuptools import setup, find_packages

with open("requirements.txt") as f:
    requirements = [line for line in f.read().splitlines() if line and not line.startswith("pytest")]

setup(
    name="ntk-lab",
    version="0.1.0",
    description="Neural tangent kernel scores for ranking and searching small cell architectures",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.10",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7"]},
    include_package_data=True,
    entry_points={
        "console_scripts": [
            "ntk-lab=ntk_lab.cli.cli:main",
        ],
    },
    package_data={
        "ntk_lab.cli": ["templates/*.jinja2"],
    },
)
