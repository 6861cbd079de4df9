"""fxlab: indicator features, Naive Bayes with rejection, GA feature search,
hourly backtests and t-SNE maps for FX candle series."""

__version__ = "0.1.0"
