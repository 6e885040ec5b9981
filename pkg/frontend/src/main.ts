import { ApiClient } from './api.js';
import { createApp } from './app.js';

window.addEventListener('DOMContentLoaded', () => {
    const handles = createApp(document, new ApiClient(''));
    (window as unknown as { objctrl: unknown }).objctrl = handles;
});
