import os
import time

from redis import Redis
from rq import Queue

import config

queue_name = 'test' if os.environ.get(
    'FPSKETCH_ENV') == 'test' else 'default'

# an end-to-end trial under the full profile can run for an hour
q = Queue(name=queue_name, connection=Redis.from_url(config.REDIS_URL),
          default_timeout=3600)


class TrialFailed(Exception):

    """A queued trial raised inside the worker."""
    pass


def enqueue(*args, **kwargs):
    return q.enqueue(*args, **kwargs)


def run_all(func, kwargs_list, poll_seconds=0.5):
    """Enqueue ``func(**kw)`` for each kw and wait for every result, in
    submission order."""
    jobs = [q.enqueue_call(func=func, kwargs=kw) for kw in kwargs_list]
    while True:
        failed = [job for job in jobs if job.is_failed]
        if failed:
            raise TrialFailed("job {} failed: {}".format(failed[0].id,
                                                         failed[0].exc_info))
        if all(job.is_finished for job in jobs):
            return [job.result for job in jobs]
        time.sleep(poll_seconds)
