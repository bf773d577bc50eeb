from setuptools import setup, find_packages


setup(
    name='abfp',
    packages=find_packages(),
    install_requires=[
        'torch',
        'numpy',
        'numba',
        'einops',
        'yacs',
        'tqdm',
        'tensorboard',
    ],
    entry_points={
        'console_scripts': ['abfp=abfp.cli:main'],
    })
