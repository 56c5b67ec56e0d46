"""
Armazenamento SQLite dos resultados das execuções do MorreyLab.
"""

import json
import logging
import os
import sqlite3
from typing import Any, Dict, Iterable, List, Optional

logger = logging.getLogger(__name__)

# Versão do esquema do banco de dados
SCHEMA_VERSION = 1


class ResultsStore:
    """Registro das execuções e dos resultados por caso."""

    def __init__(self, db_path: str):
        """Abre (ou cria) o banco de dados.

        Args:
            db_path: Caminho do arquivo SQLite (':memory:' para um banco temporário).
        """
        self.db_path = db_path
        self.conn: Optional[sqlite3.Connection] = None
        self._connect()
        self._initialize_database()

    def _connect(self) -> None:
        try:
            if self.db_path != ':memory:':
                os.makedirs(os.path.dirname(os.path.abspath(self.db_path)), exist_ok=True)
            self.conn = sqlite3.connect(self.db_path, check_same_thread=False)
            self.conn.row_factory = sqlite3.Row
            self.conn.execute("PRAGMA foreign_keys = ON")
            logger.debug(f"Conectado ao banco de resultados: {self.db_path}")
        except sqlite3.Error as e:
            logger.error(f"Erro ao conectar ao banco de resultados: {e}")
            raise

    def _initialize_database(self) -> None:
        try:
            self.conn.execute("""
                CREATE TABLE IF NOT EXISTS metadata (
                    key TEXT PRIMARY KEY,
                    value TEXT
                )
            """)
            row = self.conn.execute("SELECT value FROM metadata WHERE key = 'schema_version'").fetchone()
            if row is None:
                self._create_tables()
                self._update_schema_version(SCHEMA_VERSION)
            elif int(row['value']) > SCHEMA_VERSION:
                raise sqlite3.DatabaseError(
                    f"schema version {row['value']} is newer than supported ({SCHEMA_VERSION})"
                )
            self.conn.commit()
        except sqlite3.Error as e:
            logger.error(f"Erro ao inicializar o banco de resultados: {e}")
            self.conn.rollback()
            raise

    def _create_tables(self) -> None:
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                config TEXT NOT NULL,
                passed BOOLEAN,
                output_dir TEXT,
                started_at TEXT NOT NULL,
                finished_at TEXT
            )
        """)
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS case_results (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id INTEGER NOT NULL,
                case_id TEXT NOT NULL,
                p REAL NOT NULL,
                lambda REAL NOT NULL,
                alpha_pred REAL,
                alpha_hat REAL,
                passed BOOLEAN NOT NULL,
                FOREIGN KEY (run_id) REFERENCES runs (id) ON DELETE CASCADE
            )
        """)
        self.conn.execute("CREATE INDEX IF NOT EXISTS idx_case_results_run ON case_results (run_id)")

    def _update_schema_version(self, version: int) -> None:
        self.conn.execute(
            "INSERT OR REPLACE INTO metadata (key, value) VALUES ('schema_version', ?)",
            (str(version),)
        )

    @property
    def schema_version(self) -> int:
        row = self.conn.execute("SELECT value FROM metadata WHERE key = 'schema_version'").fetchone()
        return int(row['value'])

    def start_run(self, command: str, config: Dict[str, Any], started_at: str, output_dir: Optional[str] = None) -> int:
        """Registra uma execução e devolve o seu id."""
        cursor = self.conn.execute(
            "INSERT INTO runs (command, config, output_dir, started_at) VALUES (?, ?, ?, ?)",
            (command, json.dumps(config, sort_keys=True, default=str), output_dir, started_at)
        )
        self.conn.commit()
        return int(cursor.lastrowid)

    def finish_run(self, run_id: int, passed: bool, finished_at: str) -> None:
        self.conn.execute(
            "UPDATE runs SET passed = ?, finished_at = ? WHERE id = ?",
            (bool(passed), finished_at, run_id)
        )
        self.conn.commit()

    def add_case_results(self, run_id: int, rows: Iterable[Dict[str, Any]]) -> int:
        """Grava as linhas {id, p, lambda, alpha_pred, alpha_hat, pass} de uma execução.

        Returns:
            Número de linhas gravadas.
        """
        values = [
            (run_id, row['id'], float(row['p']), float(row['lambda']),
             row.get('alpha_pred'), row.get('alpha_hat'), bool(row['pass']))
            for row in rows
        ]
        try:
            self.conn.executemany(
                """
                INSERT INTO case_results (run_id, case_id, p, lambda, alpha_pred, alpha_hat, passed)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                values
            )
            self.conn.commit()
        except sqlite3.Error as e:
            self.conn.rollback()
            logger.error(f"Erro ao gravar resultados da execução {run_id}: {e}")
            raise
        return len(values)

    def get_runs(self, limit: int = 50) -> List[Dict[str, Any]]:
        rows = self.conn.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,)).fetchall()
        return [dict(row) for row in rows]

    def get_case_results(self, run_id: int) -> List[Dict[str, Any]]:
        rows = self.conn.execute(
            "SELECT case_id, p, lambda, alpha_pred, alpha_hat, passed FROM case_results WHERE run_id = ? ORDER BY case_id",
            (run_id,)
        ).fetchall()
        return [dict(row) for row in rows]

    def close(self) -> None:
        if self.conn is not None:
            self.conn.close()
            self.conn = None

    def __enter__(self) -> "ResultsStore":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()
