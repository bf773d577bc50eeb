class Logger:
    """ tensorboard scalars for verification and sweep runs, a no-op without logdir """

    def __init__(self, name, logdir=None):
        self.total_steps = 0
        self.writer = None
        self.name = name
        self.logdir = logdir

    def _get_writer(self):
        if self.writer is None and self.logdir:
            from torch.utils.tensorboard import SummaryWriter
            self.writer = SummaryWriter("{}/{}".format(self.logdir, self.name))
        return self.writer

    def write_dict(self, results, step=None):
        step = self.total_steps if step is None else step
        self.total_steps = step + 1

        writer = self._get_writer()
        if writer is None:
            return

        for key in results:
            writer.add_scalar(key, results[key], step)

    def close(self):
        if self.writer is not None:
            self.writer.close()
