from setuptools import setup, find_packages

with open("README.md", "r") as fh:
    long_description = fh.read()

setup(
    name="exclusion-lab",
    description="Exact kernels, gradient estimates and renormalized PAM solves for the symmetric exclusion process",
    author="The exclusion-lab authors",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src", exclude=("test",)),
    package_dir={"": "src"},
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords='exclusion process interacting particles random walk kernel cumulants parabolic anderson model',
    use_scm_version=True,
    python_requires='>=3.9',
    install_requires=['numpy>=1.22', 'scipy>=1.9', 'numba>=0.56'],
    entry_points={'console_scripts': ['exlab=exclusion_lab.cli:main']},
    setup_requires=['pytest-runner', 'setuptools-scm'],
    tests_require=['pytest', 'pytest-cov', 'pytest-sugar', 'codecov']

)
