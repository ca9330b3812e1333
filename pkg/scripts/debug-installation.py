#!/usr/bin/env python3
"""
Script para depurar a instalação do shared-libs e das dependências numéricas
"""
import importlib
import sys
from importlib import metadata
from pathlib import Path

NUMERIC_PACKAGES = ["numpy", "scipy", "pot", "pydantic", "python-dotenv"]
IMPORT_NAMES = {"pot": "ot", "python-dotenv": "dotenv"}


def debug_installation():
    print("🔍 Depurando instalação do abc-lab...")
    print()

    # 1. Verificar paths do Python
    print("📁 Python paths:")
    for path in sys.path:
        print(f"  - {path}")
    print()

    # 2. Versões das dependências
    print("📦 Dependências:")
    for package in NUMERIC_PACKAGES + ["abc-lab-shared"]:
        try:
            print(f"  - {package} v{metadata.version(package)}")
        except metadata.PackageNotFoundError:
            print(f"  ❌ {package} não instalado")
    print()

    # 3. Verificar estrutura de diretórios
    shared_libs_path = Path("shared-libs")
    if shared_libs_path.exists():
        package_path = shared_libs_path / "src" / "abc_lab_shared"
        print("📂 Estrutura do shared-libs:")
        print(f"  abc_lab_shared/ existe: {package_path.exists()}")
        if package_path.exists():
            for item in sorted(package_path.iterdir()):
                print(f"    - {item.name}")
    else:
        print("❌ Diretório shared-libs não encontrado!")
    print()

    # 4. Tentar imports específicos
    print("🧪 Testando imports:")
    shared_src = Path.cwd() / "shared-libs" / "src"
    if shared_src.exists() and str(shared_src) not in sys.path:
        sys.path.insert(0, str(shared_src))
        print(f"  📁 Adicionado ao sys.path: {shared_src}")

    for package in NUMERIC_PACKAGES:
        module = IMPORT_NAMES.get(package, package)
        try:
            importlib.import_module(module)
            print(f"  ✅ import {module} - OK")
        except ImportError as e:
            print(f"  ❌ import {module} - ERRO: {e}")

    try:
        from abc_lab_shared.domain.entities import SchemeState  # noqa: F401
        from abc_lab_shared.geometry import project_pi  # noqa: F401

        print("  ✅ import abc_lab_shared - OK")
    except ImportError as e:
        print(f"  ❌ import abc_lab_shared - ERRO: {e}")

    # 5. Solver de transporte exato
    try:
        import numpy as np
        import ot

        value = ot.emd2(np.array([1.0]), np.array([1.0]), np.array([[0.25]]))
        print(f"  ✅ ot.emd2 - OK (custo {float(value)})")
    except Exception as e:
        print(f"  ❌ ot.emd2 - ERRO: {e}")


if __name__ == "__main__":
    debug_installation()
