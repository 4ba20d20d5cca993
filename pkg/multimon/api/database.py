import asyncio
import logging
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Any, Dict, List, Optional

import aiosqlite

from multimon.config.settings import DB_PATH

logger = logging.getLogger(__name__)

TARGET_SCHEMA_VERSION = 2

_OLDEST_QUEUED = "SELECT id FROM jobs WHERE status = 'queued' ORDER BY created_at ASC LIMIT 1"
_CLAIM_UPDATE = (
    "UPDATE jobs SET status = 'processing', worker_id = ?, processing_started = ?, "
    "message = 'Running', updated_at = ?"
)


class JobDatabase:
    """SQLite job store shared by the API and the worker pool."""

    def __init__(self, db_path: str = DB_PATH):
        self.db_path = db_path
        self._init_lock = asyncio.Lock()
        self._supports_returning = False

    @asynccontextmanager
    async def get_connection(self):
        db = await aiosqlite.connect(self.db_path, timeout=20.0)
        await db.execute("PRAGMA journal_mode=WAL")
        await db.execute("PRAGMA busy_timeout=10000")
        await db.execute("PRAGMA synchronous=NORMAL")
        try:
            yield db
        except Exception:
            await db.rollback()
            raise
        finally:
            await db.close()

    async def _with_retry(self, operation, max_retries=3):
        """Retry on 'database is locked' with exponential backoff."""
        for attempt in range(max_retries):
            try:
                return await operation()
            except aiosqlite.OperationalError as e:
                if "locked" in str(e).lower() and attempt < max_retries - 1:
                    await asyncio.sleep(0.1 * (2 ** attempt))
                    continue
                raise

    async def init_db(self):
        async def _init():
            async with self.get_connection() as db:
                cursor = await db.execute("SELECT sqlite_version()")
                version_str = (await cursor.fetchone())[0]
                self._supports_returning = tuple(map(int, version_str.split("."))) >= (3, 35, 0)
                logger.info(f"SQLite version: {version_str}, RETURNING support: {self._supports_returning}")

                await db.execute('''
                    CREATE TABLE IF NOT EXISTS jobs (
                        id TEXT PRIMARY KEY,
                        command TEXT NOT NULL,
                        payload TEXT NOT NULL,
                        status TEXT NOT NULL,
                        created_at REAL NOT NULL,
                        updated_at REAL NOT NULL,
                        result_path TEXT,
                        message TEXT,
                        progress INTEGER DEFAULT 0,
                        worker_id TEXT,
                        processing_started REAL
                    )
                ''')
                await db.execute('CREATE INDEX IF NOT EXISTS idx_status ON jobs(status)')
                await db.execute('CREATE INDEX IF NOT EXISTS idx_created_at ON jobs(created_at)')
                await db.execute('''
                    CREATE INDEX IF NOT EXISTS idx_queue
                    ON jobs(status, created_at) WHERE status = 'queued'
                ''')
                await db.commit()

            await self.run_migrations()
            logger.info(f"Job database initialized with WAL mode: {self.db_path}")

        async with self._init_lock:
            await self._with_retry(_init)

    async def run_migrations(self):
        """Schema upgrades tracked with PRAGMA user_version."""
        async with self.get_connection() as db:
            cursor = await db.execute("PRAGMA user_version")
            current_version = (await cursor.fetchone())[0]
            logger.info(f"Current DB schema version: {current_version}, target: {TARGET_SCHEMA_VERSION}")

            if current_version < 2:
                await self._migrate_to_v2(db)
                logger.info("Applied migration to v2")

            if current_version < TARGET_SCHEMA_VERSION:
                await db.execute(f"PRAGMA user_version = {TARGET_SCHEMA_VERSION}")
                await db.commit()

    async def _migrate_to_v2(self, db):
        """
        v1 -> v2: result cache keyed by payload hash, and the ``ok`` flag that
        marks infeasible designs and other completed-but-negative results.
        """
        cursor = await db.execute("PRAGMA table_info(jobs)")
        column_names = [col[1] for col in await cursor.fetchall()]
        if 'payload_hash' not in column_names:
            await db.execute("ALTER TABLE jobs ADD COLUMN payload_hash TEXT")
        if 'ok' not in column_names:
            await db.execute("ALTER TABLE jobs ADD COLUMN ok INTEGER DEFAULT 1")
        await db.execute('CREATE INDEX IF NOT EXISTS idx_payload_hash ON jobs(payload_hash)')
        await db.execute('''
            CREATE INDEX IF NOT EXISTS idx_stale_jobs
            ON jobs(status, processing_started) WHERE status = 'processing'
        ''')

    async def create_job(self, job_id: str, job_data: Dict[str, Any]):
        async def _create():
            now = datetime.now().timestamp()
            async with self.get_connection() as db:
                await db.execute('''
                    INSERT INTO jobs (
                        id, command, payload, status, created_at, updated_at,
                        message, progress, payload_hash
                    ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                ''', (
                    job_id,
                    job_data['command'],
                    job_data['payload'],
                    job_data['status'],
                    now,
                    now,
                    job_data.get('message', ''),
                    job_data.get('progress', 0),
                    job_data.get('payload_hash'),
                ))
                await db.commit()

        await self._with_retry(_create)

    async def update_job(self, job_id: str, updates: Dict[str, Any]):
        async def _update():
            allowed_fields = {'status', 'message', 'progress', 'result_path', 'worker_id',
                              'processing_started', 'payload_hash', 'ok'}
            filtered_updates = {k: v for k, v in updates.items() if k in allowed_fields}
            filtered_updates['updated_at'] = datetime.now().timestamp()

            fields = ', '.join(f"{k} = ?" for k in filtered_updates)
            values = list(filtered_updates.values()) + [job_id]
            async with self.get_connection() as db:
                await db.execute(f"UPDATE jobs SET {fields} WHERE id = ?", values)
                await db.commit()

        await self._with_retry(_update)

    async def get_job(self, job_id: str) -> Optional[Dict[str, Any]]:
        async with self.get_connection() as db:
            db.row_factory = aiosqlite.Row
            async with db.execute("SELECT * FROM jobs WHERE id = ?", (job_id,)) as cursor:
                row = await cursor.fetchone()
                return dict(row) if row else None

    async def get_job_by_hash(self, payload_hash: str) -> Optional[Dict[str, Any]]:
        """Latest completed job with the same command and payload."""
        async with self.get_connection() as db:
            db.row_factory = aiosqlite.Row
            async with db.execute(
                """SELECT * FROM jobs
                   WHERE payload_hash = ? AND status = 'completed'
                   ORDER BY created_at DESC
                   LIMIT 1""",
                (payload_hash,),
            ) as cursor:
                row = await cursor.fetchone()
                return dict(row) if row else None

    async def get_pending_jobs(self) -> List[Dict[str, Any]]:
        async with self.get_connection() as db:
            db.row_factory = aiosqlite.Row
            async with db.execute('''
                SELECT * FROM jobs
                WHERE status IN ('queued', 'processing')
                ORDER BY created_at DESC
            ''') as cursor:
                return [dict(row) for row in await cursor.fetchall()]

    async def claim_next_job(self, worker_id: str) -> Optional[Dict[str, Any]]:
        """
        Atomically move the oldest queued job to processing for ``worker_id``.

        Returns:
            The claimed job row, or None when the queue is empty
        """
        async def _claim():
            async with self.get_connection() as db:
                db.row_factory = aiosqlite.Row
                now = datetime.now().timestamp()

                if self._supports_returning:
                    cursor = await db.execute(
                        f"{_CLAIM_UPDATE} WHERE id = ({_OLDEST_QUEUED}) RETURNING *", (worker_id, now, now)
                    )
                    row = await cursor.fetchone()
                    await db.commit()
                    return dict(row) if row else None

                # Older SQLite: select and update inside one write transaction.
                await db.execute("BEGIN IMMEDIATE")
                try:
                    row = await (await db.execute(_OLDEST_QUEUED)).fetchone()
                    claimed = None
                    if row:
                        cursor = await db.execute(
                            f"{_CLAIM_UPDATE} WHERE id = ? AND status = 'queued'", (worker_id, now, now, row['id'])
                        )
                        if cursor.rowcount == 1:
                            claimed = await (await db.execute("SELECT * FROM jobs WHERE id = ?", (row['id'],))).fetchone()
                    await db.commit()
                    return dict(claimed) if claimed else None
                except Exception:
                    await db.rollback()
                    raise

        return await self._with_retry(_claim)

    async def _update_processing(self, assignments: str, params: tuple, extra_where: str = "") -> int:
        """Apply ``assignments`` to every processing job (optionally filtered); returns the row count."""
        async def _apply():
            async with self.get_connection() as db:
                cursor = await db.execute(
                    f"UPDATE jobs SET {assignments} WHERE status = 'processing' {extra_where}", params
                )
                await db.commit()
                return cursor.rowcount

        return await self._with_retry(_apply)

    async def release_stale_jobs(self, timeout_seconds: int = 3600) -> int:
        """Return processing jobs older than ``timeout_seconds`` to the queue."""
        now = datetime.now().timestamp()
        count = await self._update_processing(
            "status = 'queued', worker_id = NULL, processing_started = NULL, "
            "message = 'Returned to queue after timeout', updated_at = ?",
            (now, now - timeout_seconds),
            "AND processing_started < ?",
        )
        if count > 0:
            logger.warning(f"Released {count} stale jobs back to queue")
        return count

    async def fail_interrupted_jobs(self) -> int:
        """Mark jobs left processing by a previous server run as failed."""
        count = await self._update_processing(
            "status = 'failed', message = 'Server was restarted while processing', updated_at = ?",
            (datetime.now().timestamp(),),
        )
        if count > 0:
            logger.info(f"Marked {count} interrupted jobs as failed")
        return count

    async def get_queue_statistics(self) -> Dict[str, Any]:
        """Job counts by status and by command, plus throughput over the last hour."""
        stats: Dict[str, Any] = {status: 0 for status in ('queued', 'processing', 'completed', 'failed')}
        by_command: Dict[str, Dict[str, int]] = {}
        async with self.get_connection() as db:
            async with db.execute(
                "SELECT command, status, COUNT(*) FROM jobs GROUP BY command, status"
            ) as cursor:
                for command, status, count in await cursor.fetchall():
                    stats[status] = stats.get(status, 0) + count
                    by_command.setdefault(command, {})[status] = count

            hour_ago = datetime.now().timestamp() - 3600
            async with db.execute("""
                SELECT COUNT(*), AVG(updated_at - processing_started)
                FROM jobs
                WHERE status = 'completed' AND processing_started IS NOT NULL AND updated_at > ?
            """, (hour_ago,)) as cursor:
                recent, mean_runtime = await cursor.fetchone()
            async with db.execute(
                "SELECT COUNT(DISTINCT worker_id) FROM jobs WHERE status = 'processing'"
            ) as cursor:
                (active_workers,) = await cursor.fetchone()

        stats['total'] = sum(stats[s] for s in ('queued', 'processing', 'completed', 'failed'))
        stats['active_workers'] = active_workers or 0
        stats['processing_rate'] = round((recent or 0) / 60, 2)  # jobs per minute
        stats['avg_processing_time'] = round(mean_runtime or 0, 2)
        stats['by_command'] = by_command
        return stats


# Shared by the API and the worker pool
job_db = JobDatabase()
