import logging
import os

LOG_FORMAT = '%(asctime)s %(name)-12s %(levelname)-8s %(message)s'
TRACE_LOGGER_NAME = 'msmtree.trace'


def get_module_logger(mod_name):
    '''Main Logging module'''
    logger = logging.getLogger(mod_name)
    # Module loggers are created once per import, but tests reload modules.
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(LOG_FORMAT)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    logger.setLevel(os.getenv('MSMTREE_LOG_LEVEL', 'INFO').upper())
    logger.propagate = False
    return logger


def get_trace_logger() -> logging.Logger:
    '''Logger receiving one line per cutting-plane iteration.'''
    logger = logging.getLogger(TRACE_LOGGER_NAME)
    logger.setLevel(logging.INFO)
    logger.propagate = False
    return logger


def attach_trace_file(path: str) -> logging.Handler:
    '''Route split traces into `path`. Returns the handler so callers can detach it.'''
    handler = logging.FileHandler(path, mode='w', encoding='utf-8')
    handler.setFormatter(logging.Formatter('%(message)s'))
    get_trace_logger().addHandler(handler)
    return handler


def detach_trace_handler(handler: logging.Handler):
    get_trace_logger().removeHandler(handler)
    handler.close()
