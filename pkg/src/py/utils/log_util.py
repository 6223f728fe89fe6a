import logging
import sys
from datetime import datetime
from pathlib import Path


class LogUtil:
    """
    日志工具类，同时输出到控制台和文件
    日志文件按天生成，存储在项目根目录的logs目录下；
    轨迹级别的细节只在DEBUG级别输出，避免蒙特卡洛循环刷屏
    """

    _loggers = {}

    @classmethod
    def get_logger(cls, name='qramsim', level=logging.INFO):
        """
        获取日志记录器

        Args:
            name: 日志记录器名称
            level: 日志级别

        Returns:
            logging.Logger: 配置好的日志记录器
        """
        if name in cls._loggers:
            return cls._loggers[name]

        logger = logging.getLogger(name)
        logger.setLevel(level)
        logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        file_handler = cls._create_file_handler(level, formatter)
        if file_handler is not None:
            logger.addHandler(file_handler)

        # 避免重复日志
        logger.propagate = False

        cls._loggers[name] = logger
        return logger

    @classmethod
    def set_level(cls, level, name='qramsim'):
        """调整已创建记录器及其处理器的级别（CLI的--verbose使用）"""
        logger = cls.get_logger(name)
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setLevel(level)

    @classmethod
    def _create_file_handler(cls, level, formatter):
        """
        创建按天命名的文件处理器

        Args:
            level: 日志级别
            formatter: 格式化器

        Returns:
            logging.FileHandler: 文件处理器；日志目录不可写时返回None
        """
        project_root = Path(__file__).parent.parent.parent.parent
        logs_dir = project_root / 'logs'

        try:
            logs_dir.mkdir(exist_ok=True)
        except OSError:
            return None

        today = datetime.now().strftime('%Y-%m-%d')
        log_file = logs_dir / f'qramsim_{today}.log'

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)

        return file_handler

    @classmethod
    def info(cls, message, logger_name='qramsim'):
        """记录INFO级别日志"""
        cls.get_logger(logger_name).info(message)

    @classmethod
    def debug(cls, message, logger_name='qramsim'):
        """记录DEBUG级别日志"""
        cls.get_logger(logger_name).debug(message)

    @classmethod
    def warning(cls, message, logger_name='qramsim'):
        """记录WARNING级别日志"""
        cls.get_logger(logger_name).warning(message)

    @classmethod
    def error(cls, message, logger_name='qramsim'):
        """记录ERROR级别日志"""
        cls.get_logger(logger_name).error(message)


# 提供默认实例
default_logger = LogUtil.get_logger()


def log_info(message):
    """快捷方法：记录INFO级别日志"""
    default_logger.info(message)


def log_debug(message):
    """快捷方法：记录DEBUG级别日志"""
    default_logger.debug(message)


def log_warning(message):
    """快捷方法：记录WARNING级别日志"""
    default_logger.warning(message)


def log_error(message):
    """快捷方法：记录ERROR级别日志"""
    default_logger.error(message)
