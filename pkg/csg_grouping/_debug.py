import logging
import os
import time

logger = logging.getLogger("csg_grouping")


class CSG:
    """
    Package-wide switches
    """

    CSG_DEBUG = os.getenv("CSG_DEBUG", "").strip().lower() in ("1", "true", "yes")

    _handler = None


def _attach_handler():

    if CSG._handler is not None:
        return

    handler = logging.StreamHandler()
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s")
    )
    logger.addHandler(handler)
    CSG._handler = handler


def set_debug_mode(debug_bool):
    """
    Activate or deactivate debug mode

    :param debug_bool: True to log decomposition and harness progress.
        False to be quiet.
    :type debug_bool: bool
    """

    CSG.CSG_DEBUG = bool(debug_bool)

    if CSG.CSG_DEBUG:
        _attach_handler()
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.WARNING)


def debug_print(msg):
    """
    Log a message if debug mode is on

    :param msg: Message
    :type msg: str
    """

    if not CSG.CSG_DEBUG:
        return
    else:
        logger.debug(msg)


def debug_timer(msg=None, old_time=None):
    """
    Log a message with timing information if debug mode is on

    :param msg: Message
    :type msg: str
    :param old_time: Time to calculate difference for
    :type old_time: float
    """

    if not CSG.CSG_DEBUG:
        return

    t0 = time.time()

    if old_time is not None and msg is not None:
        logger.debug(msg + ": {0:.6f} seconds".format(t0 - old_time))

    return t0


if CSG.CSG_DEBUG:
    set_debug_mode(True)
